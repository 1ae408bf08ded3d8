/*
 * Copyright 2026 The srpnet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Per-frame signal path: framing, DFT and PHAT-weighted generalized
// cross-correlation.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "srpnet/common.hpp"
#include "srpnet/fft.hpp"

namespace srpnet {

struct SignalBuffer {
  std::vector<double> samples;
  double sample_rate = 48000.0;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

inline void validate(const SignalBuffer& s) {
  if (!(s.sample_rate > 0.0)) throw ConfigError("signal sample rate must be positive");
  for (double v : s.samples)
    if (!std::isfinite(v)) throw DataError("signal contains non-finite samples");
}

// One analysis frame of M microphone signals, all of length L.
struct MultichannelFrame {
  std::vector<std::vector<double>> channels;
  std::size_t frame_index = 0;
  double sample_rate = 48000.0;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

using Spectrum = std::vector<Complex>;

// Real-valued correlation indexed by lag in [-L/2, L/2). values[i] holds
// lag i - L/2, so lag 0 sits at index L/2.
struct CrossCorrelation {
  std::vector<double> values;

  std::ptrdiff_t min_lag() const { return -static_cast<std::ptrdiff_t>(values.size() / 2); }
  std::ptrdiff_t center() const { return static_cast<std::ptrdiff_t>(values.size() / 2); }
  double at_lag(std::ptrdiff_t lag) const { return values.at(static_cast<std::size_t>(lag + center())); }
};

enum class WindowKind { kRectangular, kHann, kHamming };

inline WindowKind parse_window(const std::string& name) {
  if (name == "rectangular") return WindowKind::kRectangular;
  if (name == "hann") return WindowKind::kHann;
  if (name == "hamming") return WindowKind::kHamming;
  throw ConfigError("unknown window '" + name + "' (rectangular|hann|hamming)");
}

inline std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::kRectangular || length < 2) return w;
  const double a0 = kind == WindowKind::kHann ? 0.5 : 0.54;
  for (std::size_t n = 0; n < length; ++n)
    w[n] = a0 - (1.0 - a0) * std::cos(2.0 * kPi * static_cast<double>(n) /
                                      static_cast<double>(length - 1));
  return w;
}

struct FrameSpec {
  std::size_t length = 0;  // samples
  std::size_t hop = 0;     // samples
};

inline FrameSpec frame_spec(double sample_rate, double frame_ms, double overlap_fraction) {
  if (!(frame_ms > 0.0)) throw ConfigError("frame_ms must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw ConfigError("overlap fraction must lie in [0, 1)");
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be positive");
  FrameSpec spec;
  spec.length = static_cast<std::size_t>(std::llround(frame_ms * 1e-3 * sample_rate));
  spec.hop = static_cast<std::size_t>(
      std::llround(static_cast<double>(spec.length) * (1.0 - overlap_fraction)));
  if (spec.length == 0 || spec.hop == 0) throw ConfigError("frame length rounds to zero samples");
  return spec;
}

inline std::size_t frame_count(std::size_t signal_length, const FrameSpec& spec) {
  if (signal_length < spec.length) return 0;
  return (signal_length - spec.length) / spec.hop + 1;
}

// Splits one channel into frames starting at k * hop. The trailing partial
// frame is dropped.
inline std::vector<std::vector<double>> frame_signal(const SignalBuffer& signal, double frame_ms,
                                                     double overlap_fraction,
                                                     WindowKind window = WindowKind::kRectangular) {
  const FrameSpec spec = frame_spec(signal.sample_rate, frame_ms, overlap_fraction);
  const std::size_t count = frame_count(signal.size(), spec);
  if (count == 0) throw DataError("signal shorter than one frame");
  const std::vector<double> w = make_window(window, spec.length);
  std::vector<std::vector<double>> frames(count, std::vector<double>(spec.length));
  for (std::size_t k = 0; k < count; ++k) {
    const double* src = signal.samples.data() + k * spec.hop;
    for (std::size_t n = 0; n < spec.length; ++n) frames[k][n] = src[n] * w[n];
  }
  return frames;
}

// Frames all channels on a common clock.
inline std::vector<MultichannelFrame> frame_channels(std::span<const SignalBuffer> channels,
                                                     double frame_ms, double overlap_fraction,
                                                     WindowKind window = WindowKind::kRectangular) {
  if (channels.size() < 2) throw DataError("need at least two channels");
  const double fs = channels.front().sample_rate;
  const std::size_t n = channels.front().size();
  for (const auto& c : channels) {
    if (c.sample_rate != fs) throw DataError("channels have different sample rates");
    if (c.size() != n) throw DataError("channels have different lengths");
  }
  std::vector<std::vector<std::vector<double>>> per_channel;
  per_channel.reserve(channels.size());
  for (const auto& c : channels) per_channel.push_back(frame_signal(c, frame_ms, overlap_fraction, window));

  std::vector<MultichannelFrame> frames(per_channel.front().size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    frames[k].frame_index = k;
    frames[k].sample_rate = fs;
    for (auto& ch : per_channel) frames[k].channels.push_back(std::move(ch[k]));
  }
  return frames;
}

inline Spectrum dft_forward(std::span<const double> frame, const FftPlan& plan) {
  if (frame.size() < 2) throw std::invalid_argument("dft_forward: length must be >= 2");
  std::vector<Complex> in(frame.begin(), frame.end());
  return plan.forward(in);
}

inline Spectrum dft_forward(std::span<const double> frame) {
  return dft_forward(frame, FftPlan(frame.size()));
}

inline std::vector<Complex> dft_inverse(std::span<const Complex> spectrum) {
  return FftPlan(spectrum.size()).inverse(spectrum);
}

inline constexpr double kDefaultPhatFloor = 1e-12;

// GCC-PHAT between channels m and n. The weighted cross-power
// X_m(w) X_n*(w) / max(|X_m X_n*|, floor) is inverted and read out so that
// a positive lag means channel n lags channel m.
inline CrossCorrelation gcc_phat(const Spectrum& spec_m, const Spectrum& spec_n, const FftPlan& plan,
                                 double floor_epsilon = kDefaultPhatFloor) {
  if (spec_m.empty() || spec_n.empty()) throw DataError("gcc_phat: empty spectrum");
  if (spec_m.size() != spec_n.size()) throw DataError("gcc_phat: spectrum lengths differ");
  if (plan.size() != spec_m.size()) throw std::invalid_argument("gcc_phat: plan length mismatch");
  if (!(floor_epsilon > 0.0)) throw ConfigError("gcc_phat: floor epsilon must be positive");

  const std::size_t len = spec_m.size();
  std::vector<Complex> weighted(len);
  for (std::size_t k = 0; k < len; ++k) {
    const Complex cross = spec_m[k] * std::conj(spec_n[k]);
    if (std::isnan(cross.real()) || std::isnan(cross.imag()))
      throw DataError("gcc_phat: NaN in input spectrum");
    weighted[k] = cross / std::max(std::abs(cross), floor_epsilon);
  }
  const std::vector<Complex> r = plan.inverse(weighted);

  // r[t] = sum x_m[i + t] x_n[i]; n lagging m by d peaks at r[-d], so the
  // output lag tau reads r[-tau].
  CrossCorrelation cc;
  cc.values.resize(len);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(len / 2);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(len);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lag = i - half;
    const std::ptrdiff_t src = ((-lag) % n + n) % n;
    cc.values[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(src)].real();
  }
  return cc;
}

inline CrossCorrelation gcc_phat(const Spectrum& spec_m, const Spectrum& spec_n,
                                 double floor_epsilon = kDefaultPhatFloor) {
  if (spec_m.empty()) throw DataError("gcc_phat: empty spectrum");
  return gcc_phat(spec_m, spec_n, FftPlan(spec_m.size()), floor_epsilon);
}

// Lag of the correlation maximum; ties go to the smallest |lag|, then to the
// negative lag.
inline std::ptrdiff_t tdoa_peak(const CrossCorrelation& cc) {
  if (cc.values.empty()) throw std::invalid_argument("tdoa_peak: empty correlation");
  std::ptrdiff_t best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (std::size_t i = 0; i < cc.values.size(); ++i) {
    const std::ptrdiff_t lag = static_cast<std::ptrdiff_t>(i) - cc.center();
    const double v = cc.values[i];
    const bool better =
        first || v > best ||
        (v == best && (std::abs(lag) < std::abs(best_lag) ||
                       (std::abs(lag) == std::abs(best_lag) && lag < best_lag)));
    if (better) {
      best = v;
      best_lag = lag;
      first = false;
    }
  }
  return best_lag;
}

}  // namespace srpnet
