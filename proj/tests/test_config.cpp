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

#include "srpnet/config.hpp"

namespace srpnet {
namespace {

TEST(Config, EmptyTextGivesDefaults) {
  const ExperimentConfig c = parse_config("");
  EXPECT_EQ(c.master_seed, 1u);
  EXPECT_EQ(c.train_scenarios, 60u);
  EXPECT_EQ(c.test_scenarios, 10u);
  EXPECT_EQ(c.sample_rate, 48000.0);
  EXPECT_EQ(c.frames().length, 1536u);
  EXPECT_EQ(c.geometry().size(), 4u);
  EXPECT_EQ(c.map_height(), 45u);
  EXPECT_EQ(c.map_width(), 90u);
  EXPECT_EQ(c.model.input_height, 45u);
  EXPECT_EQ(c.sigmas, (std::vector<double>{0.01, 0.2, 1.0, 1.6, 2.4}));
  EXPECT_EQ(c.top_percents.size(), 20u);
  EXPECT_EQ(c.train.optimizer, OptimizerKind::kAdam);
  EXPECT_EQ(c.window, WindowKind::kHann);
}

TEST(Config, OverridesApply) {
  const ExperimentConfig c = parse_config(
      "[experiment]\nmaster_seed = 9\ntrain_scenarios = 3\n"
      "[grid]\nazimuth_resolution = 2\npool_azimuth = 2\n"
      "[labels]\nsigmas = 0.5, 3\n"
      "[train]\noptimizer = sgd\nlearning_rate = 0.02\n"
      "[room]\ndims_min = 4, 4, 3\n");
  EXPECT_EQ(c.master_seed, 9u);
  EXPECT_EQ(c.train_scenarios, 3u);
  EXPECT_EQ(c.map_width(), 90u);
  EXPECT_EQ(c.sigmas, (std::vector<double>{0.5, 3.0}));
  EXPECT_EQ(c.train.optimizer, OptimizerKind::kSgdMomentum);
  EXPECT_EQ(c.train.learning_rate, 0.02);
  EXPECT_EQ(c.room.dims_min, (Vec3{4, 4, 3}));
}

TEST(Config, ExplicitMicrophones) {
  const ExperimentConfig c = parse_config("[array]\nmic_count = 2\nmic0 = 0.1, 0, 0\nmic1 = -0.1, 0, 0\n");
  ASSERT_TRUE(c.explicit_mics);
  EXPECT_EQ(c.geometry().size(), 2u);
  EXPECT_NEAR(c.geometry().distance(0, 1), 0.2, 1e-15);
}

TEST(Config, RoundTripThroughIni) {
  ExperimentConfig c = parse_config("[experiment]\nmaster_seed = 77\n[labels]\nsigmas = 0.3\n[eval]\ntop_percents = 10, 100\n");
  const std::string text = config_to_ini(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(config_to_ini(back), text);
  EXPECT_EQ(back.master_seed, 77u);
  EXPECT_EQ(back.top_percents, (std::vector<double>{10, 100}));
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("[nonsense]\na = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[audio]\nsample_rat = 48000\n"), ConfigError);
  EXPECT_THROW(parse_config("[audio]\nsample_rate = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("[audio]\nwindow = kaiser\n"), ConfigError);
  EXPECT_THROW(parse_config("[labels]\nsigmas = 1, x\n"), ConfigError);
  EXPECT_THROW(parse_config("[labels]\nsigmas = 0.5, -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[eval]\nsigma = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[eval]\ntop_percents = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\npool_azimuth = 7\n"), ConfigError);
  EXPECT_THROW(parse_config("[array]\nradius = 0.1\nmic_count = 9\n"), ConfigError);
  EXPECT_THROW(parse_config("[experiment\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/srpnet.ini"), ConfigError);
}

TEST(Config, OverlappingSeedRangesRejected) {
  EXPECT_THROW(parse_config("[experiment]\ntrain_seed_start = 0\ntrain_scenarios = 10\ntest_seed_start = 5\n"),
               ConfigError);
  EXPECT_NO_THROW(parse_config("[experiment]\ntrain_seed_start = 0\ntrain_scenarios = 10\ntest_seed_start = 10\n"));
}

}  // namespace
}  // namespace srpnet
