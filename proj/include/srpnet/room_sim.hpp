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

// Shoebox room simulation with the image-source method, randomized scenario
// sampling and synthetic source signals.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "srpnet/array_geometry.hpp"
#include "srpnet/common.hpp"
#include "srpnet/fft.hpp"
#include "srpnet/signal_core.hpp"

namespace srpnet {

struct ScenarioConfig {
  Vec3 dims_min{3.0, 5.0, 3.0};
  Vec3 dims_max{6.0, 10.0, 4.0};
  double absorption_min = 0.2;
  double absorption_max = 0.8;
  double wall_margin_m = 0.1;
  double distance_min_factor = 1.0 / 3.0;  // times the critical distance
  double distance_max_factor = 3.0;
  int max_attempts = 10000;

  void validate() const {
    if (!(dims_min.x > 0 && dims_min.y > 0 && dims_min.z > 0)) throw ConfigError("room dimensions must be positive");
    if (dims_min.x > dims_max.x || dims_min.y > dims_max.y || dims_min.z > dims_max.z)
      throw ConfigError("room dimension bounds are inverted");
    if (!(absorption_min > 0.0 && absorption_min <= absorption_max && absorption_max <= 1.0))
      throw ConfigError("absorption bounds must satisfy 0 < min <= max <= 1");
    if (!(wall_margin_m >= 0.0)) throw ConfigError("wall margin must be non-negative");
    if (!(distance_min_factor > 0.0 && distance_min_factor <= distance_max_factor))
      throw ConfigError("distance band must satisfy 0 < min <= max");
    if (max_attempts <= 0) throw ConfigError("max_attempts must be positive");
  }
};

struct RoomScenario {
  std::uint64_t seed = 0;
  Vec3 room_dims;
  double absorption = 0.5;  // energy absorption, uniform over the six walls
  Vec3 source_pos;
  Vec3 array_center;
  double t60 = 0.0;
  double critical_distance = 0.0;
  double true_azimuth_deg = 0.0;

  double volume() const { return room_dims.x * room_dims.y * room_dims.z; }
  double source_distance() const { return (source_pos - array_center).norm(); }
};

struct RoomImpulseResponse {
  std::vector<double> taps;
  double sample_rate = 48000.0;
};

inline double room_volume(const Vec3& dims) { return dims.x * dims.y * dims.z; }

inline double room_surface(const Vec3& dims) {
  return 2.0 * (dims.x * dims.y + dims.x * dims.z + dims.y * dims.z);
}

// Sabine reverberation time in seconds.
inline double sabine_t60(const Vec3& room_dims, double absorption) {
  if (!(absorption > 0.0 && absorption <= 1.0)) throw ConfigError("absorption must lie in (0, 1]");
  if (!(room_dims.x > 0 && room_dims.y > 0 && room_dims.z > 0)) throw ConfigError("room dimensions must be positive");
  return 0.161 * room_volume(room_dims) / (absorption * room_surface(room_dims));
}

// Diffuse-field critical distance in meters.
inline double critical_distance(double room_volume_m3, double t60_s) {
  if (!(room_volume_m3 > 0.0 && t60_s > 0.0)) throw ConfigError("critical_distance: inputs must be positive");
  return 0.057 * std::sqrt(room_volume_m3 / t60_s);
}

// Azimuth of `target` seen from `origin` in the horizontal plane, [0, 360).
inline double azimuth_between(const Vec3& origin, const Vec3& target) {
  return wrap_degrees(rad2deg(std::atan2(target.y - origin.y, target.x - origin.x)));
}

inline bool inside_with_margin(const Vec3& p, const Vec3& dims, double margin) {
  return p.x >= margin && p.x <= dims.x - margin && p.y >= margin && p.y <= dims.y - margin && p.z >= margin &&
         p.z <= dims.z - margin;
}

// Draws room, absorption and placements. Placement is rejection-sampled:
// the array center and the source (on the array's horizontal plane) are
// uniform over positions that keep every element inside the margin, and a
// draw is kept only when the source distance lies in the critical-distance
// band.
inline RoomScenario sample_scenario(std::uint64_t seed, const ScenarioConfig& config, const ArrayGeometry& geometry) {
  config.validate();
  Rng rng(seed);
  RoomScenario s;
  s.seed = seed;
  s.room_dims = {rng.uniform(config.dims_min.x, config.dims_max.x), rng.uniform(config.dims_min.y, config.dims_max.y),
                 rng.uniform(config.dims_min.z, config.dims_max.z)};
  s.absorption = rng.uniform(config.absorption_min, config.absorption_max);
  s.t60 = sabine_t60(s.room_dims, s.absorption);
  s.critical_distance = critical_distance(s.volume(), s.t60);

  Vec3 lo{0, 0, 0}, hi{0, 0, 0};
  for (const auto& m : geometry.mics()) {
    lo = {std::min(lo.x, m.x), std::min(lo.y, m.y), std::min(lo.z, m.z)};
    hi = {std::max(hi.x, m.x), std::max(hi.y, m.y), std::max(hi.z, m.z)};
  }
  const double margin = config.wall_margin_m;
  const double d_min = config.distance_min_factor * s.critical_distance;
  const double d_max = config.distance_max_factor * s.critical_distance;
  const Vec3& dims = s.room_dims;

  const double cx0 = margin - lo.x, cx1 = dims.x - margin - hi.x;
  const double cy0 = margin - lo.y, cy1 = dims.y - margin - hi.y;
  const double cz0 = std::max(margin - lo.z, margin), cz1 = std::min(dims.z - margin - hi.z, dims.z - margin);
  if (cx0 > cx1 || cy0 > cy1 || cz0 > cz1) throw ConfigError("array does not fit inside the sampled room");

  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const Vec3 center{rng.uniform(cx0, cx1), rng.uniform(cy0, cy1), rng.uniform(cz0, cz1)};
    const Vec3 source{rng.uniform(margin, dims.x - margin), rng.uniform(margin, dims.y - margin), center.z};
    const double d = (source - center).norm();
    if (d < d_min || d > d_max) continue;
    bool clear = true;
    for (const auto& m : geometry.placed_at(center))
      if ((m - source).norm() <= 0.0) clear = false;
    if (!clear) continue;
    s.array_center = center;
    s.source_pos = source;
    s.true_azimuth_deg = azimuth_between(center, source);
    return s;
  }
  throw ConfigError("scenario sampling exceeded " + std::to_string(config.max_attempts) +
                    " attempts; placement constraints are infeasible");
}

// Smallest reflection order whose image lattice spans at least T60 * c
// along every room axis.
inline int adaptive_max_order(const Vec3& room_dims, double t60, double speed_of_sound) {
  const double shortest = std::min({room_dims.x, room_dims.y, room_dims.z});
  return static_cast<int>(std::ceil(t60 * speed_of_sound / shortest)) + 1;
}

struct RirOptions {
  int max_order = -1;           // < 0 selects adaptive_max_order
  std::size_t length = 0;       // taps; 0 selects T60 plus the longest direct path
  double speed_of_sound = kDefaultSpeedOfSound;
};

inline std::size_t default_rir_length(const RoomScenario& scenario, double sample_rate, double speed_of_sound) {
  const double diagonal = scenario.room_dims.norm();
  return static_cast<std::size_t>(std::ceil((scenario.t60 + diagonal / speed_of_sound) * sample_rate)) + 2;
}

// Image-source RIR for a single microphone. Each image contributes
// beta^k / (4 pi d) at delay d / c, with beta = sqrt(1 - alpha) the
// pressure reflection coefficient and k the number of wall hits; the
// fractional delay is split linearly over the two neighbouring taps.
inline RoomImpulseResponse image_method_rir(const RoomScenario& scenario, const Vec3& mic_position, int max_order,
                                            double sample_rate, const RirOptions& options = {}) {
  if (!inside_with_margin(mic_position, scenario.room_dims, 0.0) ||
      !inside_with_margin(scenario.source_pos, scenario.room_dims, 0.0))
    throw ConfigError("image_method_rir: source and microphone must lie inside the room");
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be positive");
  const double c = options.speed_of_sound;
  const int order = max_order >= 0 ? max_order : adaptive_max_order(scenario.room_dims, scenario.t60, c);
  const std::size_t length = options.length > 0 ? options.length : default_rir_length(scenario, sample_rate, c);

  RoomImpulseResponse rir;
  rir.sample_rate = sample_rate;
  rir.taps.assign(length, 0.0);

  const double beta = std::sqrt(std::max(0.0, 1.0 - scenario.absorption));
  std::vector<double> beta_pow(static_cast<std::size_t>(order) + 1);
  beta_pow[0] = 1.0;
  for (std::size_t k = 1; k < beta_pow.size(); ++k) beta_pow[k] = beta_pow[k - 1] * beta;

  const double max_dist = static_cast<double>(length - 1) / sample_rate * c;
  const Vec3& L = scenario.room_dims;
  const Vec3& s = scenario.source_pos;
  const Vec3& r = mic_position;
  const int nx = static_cast<int>(std::ceil(max_dist / (2.0 * L.x))) + 1;
  const int ny = static_cast<int>(std::ceil(max_dist / (2.0 * L.y))) + 1;
  const int nz = static_cast<int>(std::ceil(max_dist / (2.0 * L.z))) + 1;
  const double samples_per_meter = sample_rate / c;

  for (int qx = 0; qx <= 1; ++qx) {
    for (int lx = -nx; lx <= nx; ++lx) {
      const int kx = std::abs(lx - qx) + std::abs(lx);
      if (kx > order) continue;
      const double dx = (1 - 2 * qx) * s.x + 2.0 * lx * L.x - r.x;
      if (std::abs(dx) > max_dist) continue;
      for (int qy = 0; qy <= 1; ++qy) {
        for (int ly = -ny; ly <= ny; ++ly) {
          const int ky = std::abs(ly - qy) + std::abs(ly);
          if (kx + ky > order) continue;
          const double dy = (1 - 2 * qy) * s.y + 2.0 * ly * L.y - r.y;
          const double dxy2 = dx * dx + dy * dy;
          if (dxy2 > max_dist * max_dist) continue;
          for (int qz = 0; qz <= 1; ++qz) {
            for (int lz = -nz; lz <= nz; ++lz) {
              const int kz = std::abs(lz - qz) + std::abs(lz);
              const int k = kx + ky + kz;
              if (k > order) continue;
              const double dz = (1 - 2 * qz) * s.z + 2.0 * lz * L.z - r.z;
              const double d = std::sqrt(dxy2 + dz * dz);
              const double t = d * samples_per_meter;
              const double base = std::floor(t);
              const auto i0 = static_cast<std::size_t>(base);
              if (i0 + 1 >= length) continue;
              const double amp = beta_pow[static_cast<std::size_t>(k)] / (4.0 * kPi * d);
              const double frac = t - base;
              rir.taps[i0] += amp * (1.0 - frac);
              rir.taps[i0 + 1] += amp * frac;
            }
          }
        }
      }
    }
  }
  return rir;
}

// Linear convolution of `signal` with `kernel`, truncated to `out_length`.
inline std::vector<double> fft_convolve(const std::vector<double>& signal, const std::vector<double>& kernel,
                                        std::size_t out_length) {
  std::size_t n = 1;
  while (n < signal.size() + kernel.size() - 1) n <<= 1;
  const FftPlan plan(n);
  std::vector<Complex> a(n), b(n);
  std::copy(signal.begin(), signal.end(), a.begin());
  std::copy(kernel.begin(), kernel.end(), b.begin());
  std::vector<Complex> fa = plan.forward(a), fb = plan.forward(b);
  for (std::size_t k = 0; k < n; ++k) fa[k] *= fb[k];
  const std::vector<Complex> y = plan.inverse(fa);
  std::vector<double> out(out_length, 0.0);
  for (std::size_t i = 0; i < std::min(out_length, n); ++i) out[i] = y[i].real();
  return out;
}

struct RenderOptions {
  double duration_s = 2.5;
  int max_order = -1;
  double speed_of_sound = kDefaultSpeedOfSound;
};

// Convolves the source with each microphone's RIR on a common clock
// (t = 0 is source emission) and truncates to the recording duration.
inline std::vector<SignalBuffer> render_scene(const RoomScenario& scenario, const SignalBuffer& source,
                                              const ArrayGeometry& geometry, const RenderOptions& options = {}) {
  validate(source);
  const auto n_out = static_cast<std::size_t>(std::llround(options.duration_s * source.sample_rate));
  if (n_out == 0) throw ConfigError("render duration must be positive");
  if (source.size() < n_out) throw DataError("source signal shorter than the recording duration");
  const bool silent =
      std::all_of(source.samples.begin(), source.samples.begin() + static_cast<std::ptrdiff_t>(n_out),
                  [](double v) { return v == 0.0; });
  if (silent) throw DataError("render_scene: silent source");

  const std::vector<double> dry(source.samples.begin(), source.samples.begin() + static_cast<std::ptrdiff_t>(n_out));
  RirOptions rir_opts;
  rir_opts.speed_of_sound = options.speed_of_sound;
  std::vector<SignalBuffer> out;
  for (const Vec3& mic : geometry.placed_at(scenario.array_center)) {
    const RoomImpulseResponse rir = image_method_rir(scenario, mic, options.max_order, source.sample_rate, rir_opts);
    out.push_back({fft_convolve(dry, rir.taps, n_out), source.sample_rate});
  }
  return out;
}

enum class SourceKind { kWhiteNoise, kSpeechLike };

inline SourceKind parse_source_kind(const std::string& name) {
  if (name == "white_noise") return SourceKind::kWhiteNoise;
  if (name == "speech_like") return SourceKind::kSpeechLike;
  throw ConfigError("unknown source kind '" + name + "' (white_noise|speech_like)");
}

// Synthetic stand-in for recorded speech. white_noise is uniform in
// [-1, 1]; speech_like is band-shaped Gaussian noise (100 Hz - 4 kHz with a
// spectral tilt) under a 4 Hz syllabic envelope and a slower phrase
// envelope, peak-normalized to 0.9.
inline SignalBuffer synth_source(SourceKind kind, double duration_s, std::uint64_t seed,
                                 double sample_rate = 48000.0) {
  if (!(duration_s > 0.0)) throw ConfigError("duration must be positive");
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  Rng rng(seed);
  SignalBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(n);
  if (kind == SourceKind::kWhiteNoise) {
    for (auto& v : out.samples) v = rng.uniform(-1.0, 1.0);
    return out;
  }

  std::vector<Complex> noise(n);
  for (auto& v : noise) v = rng.normal();
  const FftPlan plan(n);
  std::vector<Complex> spec = plan.forward(noise);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t kk = std::min(k, n - k);
    const double f = static_cast<double>(kk) * sample_rate / static_cast<double>(n);
    double g = 1.0 / std::sqrt(1.0 + (f / 1000.0) * (f / 1000.0));
    if (f < 100.0) g *= (f / 100.0) * (f / 100.0);
    if (f > 4000.0) g *= std::pow(4000.0 / f, 4.0);
    spec[k] *= g;
  }
  const std::vector<Complex> shaped = plan.inverse(spec);

  const double syllable_phase = rng.uniform(0.0, 2.0 * kPi);
  const double phrase_phase = rng.uniform(0.0, 2.0 * kPi);
  const double syllable_rate = rng.uniform(3.5, 4.5);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double syl = 0.5 - 0.5 * std::cos(2.0 * kPi * syllable_rate * t + syllable_phase);
    const double phrase = 0.5 - 0.5 * std::cos(2.0 * kPi * 0.4 * t + phrase_phase);
    const double env = 0.05 + 0.95 * syl * (0.4 + 0.6 * phrase);
    out.samples[i] = shaped[i].real() * env;
    peak = std::max(peak, std::abs(out.samples[i]));
  }
  if (peak > 0.0)
    for (auto& v : out.samples) v *= 0.9 / peak;
  return out;
}

}  // namespace srpnet
