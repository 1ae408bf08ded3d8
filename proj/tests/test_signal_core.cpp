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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "srpnet/fft.hpp"
#include "srpnet/signal_core.hpp"

namespace srpnet {
namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

std::vector<double> circular_delay(const std::vector<double>& x, long d) {
  const long n = static_cast<long>(x.size());
  std::vector<double> y(x.size());
  for (long i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(((i - d) % n + n) % n)];
  return y;
}

TEST(Framing, PaperFrameSpec) {
  const FrameSpec s = frame_spec(48000.0, 32.0, 0.5);
  EXPECT_EQ(s.length, 1536u);
  EXPECT_EQ(s.hop, 768u);
}

TEST(Framing, NoOverlapTilesExactly) {
  SignalBuffer sig{std::vector<double>(2 * 1536, 0.25), 48000.0};
  const auto frames = frame_signal(sig, 32.0, 0.0);
  EXPECT_EQ(frames.size(), 2u);
}

TEST(Framing, RecordingFrameCount) {
  SignalBuffer sig{std::vector<double>(120000, 0.0), 48000.0};
  const std::size_t expected = (120000 - 1536) / 768 + 1;
  EXPECT_EQ(frame_signal(sig, 32.0, 0.5).size(), expected);
  EXPECT_EQ(expected, 155u);
}

TEST(Framing, FrameStartsAtHopMultiples) {
  SignalBuffer sig{std::vector<double>(5000), 16000.0};
  for (std::size_t i = 0; i < sig.samples.size(); ++i) sig.samples[i] = static_cast<double>(i);
  const auto frames = frame_signal(sig, 32.0, 0.5);
  const FrameSpec s = frame_spec(16000.0, 32.0, 0.5);
  for (std::size_t k = 0; k < frames.size(); ++k) EXPECT_EQ(frames[k][0], static_cast<double>(k * s.hop));
}

TEST(Framing, CountMatchesIndexFormulaFuzz) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = 1 + rng.below(400), hop = 1 + rng.below(50), n = rng.below(3000);
    const std::size_t expected = n < len ? 0 : (n - len) / hop + 1;
    EXPECT_EQ(frame_count(n, FrameSpec{len, hop}), expected);
  }
}

TEST(Framing, ShortSignalIsAnError) {
  SignalBuffer sig{std::vector<double>(100, 0.0), 48000.0};
  EXPECT_THROW(frame_signal(sig, 32.0, 0.5), DataError);
}

TEST(Framing, BadParametersRejected) {
  EXPECT_THROW(frame_spec(48000.0, 0.0, 0.5), ConfigError);
  EXPECT_THROW(frame_spec(48000.0, 32.0, 1.0), ConfigError);
  EXPECT_THROW(frame_spec(48000.0, 32.0, -0.1), ConfigError);
}

TEST(Framing, MultichannelFramesShareClock) {
  std::vector<SignalBuffer> chans{{noise(4000, 1), 16000.0}, {noise(4000, 2), 16000.0}};
  const auto frames = frame_channels(chans, 32.0, 0.5);
  ASSERT_FALSE(frames.empty());
  EXPECT_EQ(frames[2].channels.size(), 2u);
  EXPECT_EQ(frames[2].channels[1][0], chans[1].samples[2 * 256]);
  EXPECT_EQ(frames[2].frame_index, 2u);
  chans[1].samples.pop_back();
  EXPECT_THROW(frame_channels(chans, 32.0, 0.5), DataError);
}

TEST(Window, HannEndpointsAndPeak) {
  const auto w = make_window(WindowKind::kHann, 9);
  EXPECT_NEAR(w[0], 0.0, 1e-15);
  EXPECT_NEAR(w[4], 1.0, 1e-15);
  EXPECT_EQ(parse_window("rectangular"), WindowKind::kRectangular);
  EXPECT_THROW(parse_window("kaiser"), ConfigError);
}

TEST(Dft, ImpulseGivesFlatSpectrum) {
  std::vector<double> x(16, 0.0);
  x[0] = 1.0;
  for (const auto& v : dft_forward(x)) {
    EXPECT_NEAR(v.real(), 1.0, 1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  }
}

TEST(Dft, ConstantGivesDcOnly) {
  const Spectrum s = dft_forward(std::vector<double>(8, 1.0));
  EXPECT_NEAR(s[0].real(), 8.0, 1e-12);
  for (std::size_t k = 1; k < 8; ++k) EXPECT_NEAR(std::abs(s[k]), 0.0, 1e-12);
}

TEST(Dft, MatchesNaiveOracle) {
  for (std::size_t n : {16u, 12u, 30u, 49u, 97u, 1536u}) {
    if (n > 200 && n != 1536) continue;
    const auto x = noise(n, n);
    const Spectrum fast = dft_forward(x);
    const auto ref = oracle::naive_dft(x);
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(fast[k] - ref[k]), 1e-9) << "n=" << n << " k=" << k;
  }
}

TEST(Dft, ConjugateSymmetryForRealInput) {
  const auto x = noise(1536, 5);
  const Spectrum s = dft_forward(x);
  for (std::size_t k = 1; k < s.size(); ++k)
    EXPECT_LT(std::abs(s[s.size() - k] - std::conj(s[k])), 1e-9 * std::max(1.0, std::abs(s[k])));
}

TEST(Dft, RoundTripAcrossLengths) {
  for (std::size_t n = 8; n <= 4096; n = n * 3 / 2 + 1) {
    const auto x = noise(n, n + 100);
    const auto back = dft_inverse(dft_forward(x));
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i].real() - x[i]) + std::abs(back[i].imag()));
    EXPECT_LT(worst, 1e-9) << "n=" << n;
  }
}

TEST(Dft, RejectsTooShort) {
  EXPECT_THROW(dft_forward(std::vector<double>(1, 1.0)), std::invalid_argument);
}

TEST(GccPhat, IdenticalChannelsPeakAtZero) {
  const auto x = noise(1024, 3);
  const Spectrum s = dft_forward(x);
  EXPECT_EQ(tdoa_peak(gcc_phat(s, s)), 0);
}

TEST(GccPhat, DelayMatchesTimeDomainOracle) {
  const auto x = noise(1024, 4);
  const auto y = circular_delay(x, 7);
  const CrossCorrelation cc = gcc_phat(dft_forward(x), dft_forward(y));
  const auto plain = oracle::circular_xcorr(x, y);
  const long oracle_lag = static_cast<long>(std::max_element(plain.begin(), plain.end()) - plain.begin()) - 512;
  EXPECT_EQ(oracle_lag, 7);
  EXPECT_EQ(tdoa_peak(cc), oracle_lag);
}

TEST(GccPhat, MatchesNaivePhatOracle) {
  const auto x = noise(96, 8);
  const auto y = circular_delay(noise(96, 8), -5);
  const CrossCorrelation cc = gcc_phat(dft_forward(x), dft_forward(y));
  const auto ref = oracle::naive_gcc_phat(x, y);
  ASSERT_EQ(cc.values.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(cc.values[i], ref[i], 1e-9);
  EXPECT_EQ(tdoa_peak(cc), -5);
}

TEST(GccPhat, SilenceGivesZerosWithoutNan) {
  const Spectrum z = dft_forward(std::vector<double>(64, 0.0));
  const CrossCorrelation cc = gcc_phat(z, z, 1e-12);
  for (double v : cc.values) {
    EXPECT_FALSE(std::isnan(v));
    EXPECT_EQ(v, 0.0);
  }
}

TEST(GccPhat, WhitenedCrossPowerHasUnitMagnitude) {
  const auto x = noise(256, 9), y = noise(256, 10);
  const Spectrum a = dft_forward(x), b = dft_forward(y);
  const CrossCorrelation cc = gcc_phat(a, b);
  // Undo the lag shift and transform back: every bin should have modulus 1.
  std::vector<double> r(256);
  for (std::size_t i = 0; i < 256; ++i) {
    const long lag = static_cast<long>(i) - 128;
    r[static_cast<std::size_t>(((-lag) % 256 + 256) % 256)] = cc.values[i];
  }
  for (const auto& v : dft_forward(r)) EXPECT_NEAR(std::abs(v), 1.0, 1e-9);
}

TEST(GccPhat, Errors) {
  const Spectrum a = dft_forward(noise(16, 1));
  const Spectrum b = dft_forward(noise(32, 1));
  EXPECT_THROW(gcc_phat(a, b), DataError);
  EXPECT_THROW(gcc_phat(Spectrum{}, Spectrum{}), DataError);
  EXPECT_THROW(gcc_phat(a, a, 0.0), ConfigError);
  Spectrum bad = a;
  bad[3] = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  EXPECT_THROW(gcc_phat(bad, a), DataError);
}

TEST(TdoaPeak, ConstructedPeak) {
  CrossCorrelation cc;
  cc.values.assign(64, 0.0);
  cc.values[32 + 12] = 1.0;
  EXPECT_EQ(tdoa_peak(cc), 12);
}

TEST(TdoaPeak, SymmetricTieGoesNegative) {
  CrossCorrelation cc;
  cc.values.assign(64, 0.0);
  cc.values[32 + 3] = 1.0;
  cc.values[32 - 3] = 1.0;
  EXPECT_EQ(tdoa_peak(cc), -3);
  cc.values[32 + 3] = 1.5;
  EXPECT_EQ(tdoa_peak(cc), 3);
}

TEST(GccPhat, DelayRecoveryRate) {
  Rng rng(77);
  int hits = 0;
  const std::size_t n = 1536;
  const FftPlan plan(n);
  for (int t = 0; t < 300; ++t) {
    const long d = static_cast<long>(rng.below(n / 2 + 1)) - static_cast<long>(n / 4);
    const auto x = noise(n, 1000 + t);
    if (tdoa_peak(gcc_phat(dft_forward(x, plan), dft_forward(circular_delay(x, d), plan), plan)) == d) ++hits;
  }
  EXPECT_GE(hits, 297);
}

}  // namespace
}  // namespace srpnet
