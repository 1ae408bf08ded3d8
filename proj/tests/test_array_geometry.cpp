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

#include <algorithm>
#include <cmath>
#include <set>

#include "srpnet/array_geometry.hpp"

namespace srpnet {
namespace {

TEST(Semicircle, PaperLayout) {
  const ArrayGeometry g = semicircular_array(0.10, 4, 60.0);
  ASSERT_EQ(g.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec3& p = g.mic(i);
    EXPECT_NEAR(std::hypot(p.x, p.y), 0.10, 1e-15);
    EXPECT_EQ(p.z, 0.0);
    EXPECT_NEAR(wrap_degrees(rad2deg(std::atan2(p.y, p.x))), 60.0 * static_cast<double>(i), 1e-9);
  }
}

TEST(Semicircle, AntipodalPair) {
  const ArrayGeometry g = semicircular_array(1.0, 2, 180.0);
  EXPECT_NEAR(g.distance(0, 1), 2.0, 1e-12);
}

TEST(Semicircle, ChordLengths) {
  const ArrayGeometry g = semicircular_array(0.10, 4, 60.0);
  std::set<long> seen;
  for (auto [m, n] : g.pairs()) {
    const double d = g.distance(m, n);
    const double delta = 60.0 * static_cast<double>(n - m);
    EXPECT_NEAR(d, 2.0 * 0.10 * std::sin(deg2rad(delta) / 2.0), 1e-12);
    seen.insert(std::lround(d * 1e4));
  }
  EXPECT_EQ(seen, (std::set<long>{1000, 1732, 2000}));
}

TEST(Semicircle, Errors) {
  EXPECT_THROW(semicircular_array(0.1, 8, 60.0), ConfigError);
  EXPECT_THROW(semicircular_array(-0.1, 4, 60.0), ConfigError);
  EXPECT_THROW(semicircular_array(0.1, 1, 60.0), ConfigError);
  EXPECT_THROW(ArrayGeometry({{0, 0, 0}, {0, 0, 0}}), ConfigError);
  EXPECT_THROW(ArrayGeometry({{0, 0, 0}, {1, 0, 0}}, 0.0), ConfigError);
}

TEST(FarField, EndfireExtreme) {
  const ArrayGeometry g = semicircular_array(0.10, 2, 180.0);
  const double fs = 48000.0;
  const double expected = 2.0 * 0.10 / 343.0 * fs;
  EXPECT_NEAR(std::abs(far_field_tdoa(g, 0, 1, 90.0, 0.0, fs)), expected, 1e-12);
  // Mic 0 sits at +x, closer to a source at phi = 0, so mic 1 lags.
  EXPECT_GT(far_field_tdoa(g, 0, 1, 90.0, 0.0, fs), 0.0);
}

TEST(FarField, ZenithIsZeroForCoplanarArray) {
  const ArrayGeometry g = semicircular_array();
  for (auto [m, n] : g.pairs()) EXPECT_NEAR(far_field_tdoa(g, m, n, 0.0, 123.0, 48000.0), 0.0, 1e-12);
}

TEST(FarField, MatchesPropagationTimeAtLongRange) {
  const ArrayGeometry g = semicircular_array();
  const double fs = 48000.0, c = 343.0, range = 100.0;
  const Vec3 src = direction_vector(90.0, 45.0) * range;
  for (auto [m, n] : g.pairs()) {
    const double tm = (src - g.mic(m)).norm() / c, tn = (src - g.mic(n)).norm() / c;
    EXPECT_NEAR(far_field_tdoa(g, m, n, 90.0, 45.0, fs), (tn - tm) * fs, 0.05);
  }
}

TEST(FarField, AntisymmetricAndBounded) {
  const ArrayGeometry g = semicircular_array();
  Rng rng(5);
  for (int t = 0; t < 2000; ++t) {
    const double th = rng.uniform(0.0, 180.0), ph = rng.uniform(0.0, 360.0);
    for (std::size_t m = 0; m < 4; ++m)
      for (std::size_t n = 0; n < 4; ++n) {
        if (m == n) continue;
        const double a = far_field_tdoa(g, m, n, th, ph, 48000.0);
        EXPECT_EQ(a, -far_field_tdoa(g, n, m, th, ph, 48000.0));
        EXPECT_LE(std::abs(a), g.distance(m, n) / 343.0 * 48000.0 + 1e-9);
      }
  }
  EXPECT_THROW(far_field_tdoa(g, 1, 1, 90.0, 0.0, 48000.0), std::invalid_argument);
}

TEST(FarField, MirrorElevationsAreIndistinguishable) {
  const ArrayGeometry g = semicircular_array();
  for (double th : {10.0, 37.0, 80.0})
    for (auto [m, n] : g.pairs())
      EXPECT_NEAR(far_field_tdoa(g, m, n, th, 77.0, 48000.0), far_field_tdoa(g, m, n, 180.0 - th, 77.0, 48000.0),
                  1e-12);
}

TEST(DelayTable, CountsAndRecompute) {
  const ArrayGeometry g = semicircular_array();
  const SteeringDelayTable t = build_delay_table(g, GridSpec{}, 48000.0);
  EXPECT_EQ(t.num_pairs(), 6u);
  for (std::size_t p = 0; p < 6; ++p) EXPECT_EQ(t.pair_delays(p).size(), 32400u);
  Rng rng(9);
  for (int k = 0; k < 500; ++k) {
    const std::size_t e = rng.below(90), a = rng.below(360);
    for (auto [m, n] : g.pairs()) {
      const double fresh = far_field_tdoa(g, m, n, static_cast<double>(e + 1), static_cast<double>(a), 48000.0);
      EXPECT_EQ(t.delay(m, n, e, a), fresh);
      EXPECT_EQ(t.delay(n, m, e, a), -fresh);
    }
  }
}

TEST(Grid, ResolutionMustDivide) {
  EXPECT_THROW((GridSpec{7.0, 1.0}).validate(), ConfigError);
  EXPECT_EQ((GridSpec{10.0, 10.0}).size(), 36u * 9u);
  EXPECT_EQ((GridSpec{}).elevation(89), 90.0);
}

TEST(ConfigBlock, RoundTripsAtSixDecimals) {
  const ArrayGeometry g = semicircular_array();
  const std::string text = geometry_to_config(g);
  EXPECT_NE(text.find("mic1 = 0.050000, 0.086603, 0.000000"), std::string::npos) << text;
  const ArrayGeometry back = geometry_from_config(text);
  ASSERT_EQ(back.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT((back.mic(i) - g.mic(i)).norm(), 1e-6);
  EXPECT_EQ(back.speed_of_sound(), 343.0);
  EXPECT_THROW(geometry_from_config("[array]\nmic_count = 2\nmic0 = 1, 2\n"), ConfigError);
  EXPECT_THROW(geometry_from_config("[other]\n"), ConfigError);
}

}  // namespace
}  // namespace srpnet
