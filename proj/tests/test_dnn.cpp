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
#include <numeric>

#include "gradcheck.hpp"
#include "srpnet/dnn.hpp"

namespace srpnet {
namespace {

// Hot column c of an 8x12 map stands for bin 15 c.
Dataset toy_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const GaussianKernel g = gaussian_kernel(1.0);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t col = rng.below(12);
    std::vector<float> x(96);
    for (auto& v : x) v = static_cast<float>(0.2 * rng.uniform());
    for (std::size_t r = 0; r < 8; ++r) x[r * 12 + col] = 1.0f;
    d.inputs.push_back(x);
    d.targets.push_back(smooth_label(15 * col, g).probs);
    d.true_bins.push_back(15 * col);
  }
  return d;
}

TEST(Model, DefaultParameterCount) {
  const Classifier<float> m(ModelConfig{});
  // conv k x k x cin x cout + cout, spatial 45x90 -> 2x5 after four pools
  std::size_t want = 0, cin = 1;
  for (std::size_t c : {8u, 16u, 32u, 64u}) {
    want += c * cin * 9 + c;
    cin = c;
  }
  want += 640 * 256 + 256 + 256 * 180 + 180;
  EXPECT_EQ(m.parameter_count(), want);
  EXPECT_EQ(want, 234740u);
  EXPECT_EQ(m.input_size(), 45u * 90u);
}

TEST(Model, ConfigValidation) {
  ModelConfig c;
  c.output_width = 90;
  EXPECT_THROW(Classifier<float>{c}, ConfigError);
  ModelConfig tiny;
  tiny.input_height = 4;
  tiny.input_width = 4;
  EXPECT_THROW(Classifier<float>{tiny}, ConfigError);
  ModelConfig zero;
  zero.dense_widths = {0};
  EXPECT_THROW(Classifier<float>{zero}, ConfigError);
}

TEST(Model, HeUniformInit) {
  const Classifier<double> m(ModelConfig{});
  const auto& p = m.parameters();
  for (std::size_t i = 0; i < p.size(); i += 2) {
    const std::size_t fan_in = p[i].shape.size() == 4 ? p[i].shape[1] * 9 : p[i].shape[1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    double ss = 0.0;
    for (double v : p[i].values) {
      EXPECT_LE(std::abs(v), bound);
      ss += v * v;
    }
    if (p[i].size() > 1000) {
      EXPECT_NEAR(ss / static_cast<double>(p[i].size()), 2.0 / fan_in, 0.1 * 2.0 / fan_in);
    }
    for (double b : p[i + 1].values) EXPECT_EQ(b, 0.0);
  }
  const Classifier<double> again(ModelConfig{});
  EXPECT_EQ(again.parameters()[0].values, p[0].values);
}

TEST(Model, SoftmaxIsDistribution) {
  const Classifier<float> m(ModelConfig{});
  Rng rng(2);
  std::vector<float> x(m.input_size());
  for (auto& v : x) v = static_cast<float>(rng.uniform());
  const auto p = m.forward(x);
  ASSERT_EQ(p.size(), 180u);
  for (double v : p) EXPECT_GE(v, 0.0);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  EXPECT_THROW(m.forward(std::vector<float>(10)), DataError);
}

TEST(Model, FloatTracksDouble) {
  const Classifier<double> md(gradcheck::small_model(5));
  const Classifier<float> mf = md.cast<float>();
  Rng rng(3);
  std::vector<double> x(md.input_size());
  for (auto& v : x) v = rng.uniform();
  const std::vector<float> xf(x.begin(), x.end());
  const auto pd = md.forward(x), pf = mf.forward(xf);
  for (std::size_t i = 0; i < pd.size(); ++i) EXPECT_NEAR(pd[i], pf[i], 1e-5);
}

TEST(Loss, UniformAgainstOneHot) {
  const std::vector<double> p(180, 1.0 / 180.0);
  std::vector<double> y(180, 0.0);
  y[17] = 1.0;
  EXPECT_NEAR(mse_loss(p, y), (1.0 - 1.0 / 180.0) / 180.0, 1e-15);
  EXPECT_NEAR(mse_loss(p, y), 0.005525, 5e-7);
  EXPECT_EQ(mse_loss(y, y), 0.0);
  EXPECT_THROW(mse_loss(p, std::vector<double>(3)), DataError);
}

TEST(Loss, ZeroWeightsGiveUniformOutput) {
  Classifier<double> m(gradcheck::small_model(1));
  for (auto& t : m.parameters()) std::fill(t.values.begin(), t.values.end(), 0.0);
  const auto p = m.forward(std::vector<double>(m.input_size(), 0.5));
  for (double v : p) EXPECT_NEAR(v, 1.0 / 180.0, 1e-15);
}

TEST(Gradients, MatchFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u}) {
    const gradcheck::Result r = gradcheck::run(seed);
    EXPECT_EQ(r.passed, r.checked) << "worst relative error " << r.worst;
    EXPECT_GT(r.checked, 3000u);
  }
}

TEST(Gradients, LossScaleIsLinear) {
  Classifier<double> m(gradcheck::small_model(4));
  Classifier<double>::Workspace ws;
  Rng rng(4);
  std::vector<double> x(m.input_size());
  for (auto& v : x) v = rng.uniform();
  m.forward(x, ws);
  const auto y = smooth_label(3, gaussian_kernel(1.0)).probs;
  const auto g1 = m.backward(ws, y, 1.0), g3 = m.backward(ws, y, 3.0);
  for (std::size_t t = 0; t < g1.size(); ++t)
    for (std::size_t k = 0; k < g1[t].size(); ++k) EXPECT_NEAR(g3[t][k], 3.0 * g1[t][k], 1e-15 + 1e-12 * std::abs(g1[t][k]));
}

TEST(Training, ZeroLearningRateLeavesWeights) {
  Classifier<float> m(gradcheck::small_model(7));
  const auto before = m.parameters();
  TrainConfig tc;
  tc.epochs = 2;
  tc.learning_rate = 0.0;
  for (OptimizerKind k : {OptimizerKind::kAdam, OptimizerKind::kSgdMomentum}) {
    tc.optimizer = k;
    train(m, toy_data(40, 1), tc);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(m.parameters()[i].values, before[i].values);
  }
}

TEST(Training, DeterministicAcrossRunsAndThreads) {
  const Dataset d = toy_data(70, 2);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 16;
  Classifier<float> a(gradcheck::small_model(8)), b(gradcheck::small_model(8)), c(gradcheck::small_model(8));
  const TrainResult ra = train(a, d, tc);
  const TrainResult rb = train(b, d, tc);
  tc.threads = 3;
  const TrainResult rc = train(c, d, tc);
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(b));
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(c));
  EXPECT_EQ(ra.epoch_loss, rb.epoch_loss);
  EXPECT_EQ(ra.epoch_loss, rc.epoch_loss);
  tc.seed = 2;
  Classifier<float> e(gradcheck::small_model(8));
  train(e, d, tc);
  EXPECT_NE(serialize_checkpoint(a), serialize_checkpoint(e));
}

TEST(Training, LearnsToyProblem) {
  Classifier<float> m(gradcheck::small_model(9));
  TrainConfig tc;
  tc.epochs = 40;
  tc.batch_size = 16;
  std::vector<std::size_t> seen;
  const TrainResult r = train(m, toy_data(240, 3), tc, [&](std::size_t e, double) { seen.push_back(e); });
  EXPECT_EQ(seen.size(), 40u);
  EXPECT_LT(r.epoch_loss.back(), 0.5 * r.epoch_loss.front());
  const Dataset test = toy_data(100, 4);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Prediction p = prediction_from_softmax(m.forward(test.inputs[i]));
    hits += p.bin == test.true_bins[i];
  }
  EXPECT_GE(hits, 90u);
}

TEST(Training, SgdMomentumAlsoRuns) {
  Classifier<float> m(gradcheck::small_model(10));
  TrainConfig tc;
  tc.optimizer = parse_optimizer("sgd");
  tc.learning_rate = 0.5;
  tc.epochs = 3;
  const TrainResult r = train(m, toy_data(60, 5), tc);
  EXPECT_EQ(r.epoch_loss.size(), 3u);
  for (double l : r.epoch_loss) EXPECT_TRUE(std::isfinite(l));
  EXPECT_THROW(parse_optimizer("rmsprop"), ConfigError);
}

TEST(Training, NonFiniteLossRaisesDivergence) {
  Classifier<float> m(gradcheck::small_model(11));
  TrainConfig tc;
  tc.optimizer = OptimizerKind::kSgdMomentum;
  tc.learning_rate = 1e40;
  tc.epochs = 5;
  tc.batch_size = 4;
  EXPECT_THROW(train(m, toy_data(16, 6), tc), DivergenceError);
}

TEST(Training, ShapeErrors) {
  Classifier<float> m(gradcheck::small_model(12));
  Dataset d = toy_data(4, 7);
  d.targets[1].pop_back();
  EXPECT_THROW(train(m, d, TrainConfig{}), DataError);
  EXPECT_THROW(train(m, Dataset{}, TrainConfig{}), DataError);
  TrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(train(m, toy_data(4, 7), bad), ConfigError);
}

TEST(Prediction, ArgmaxAndReliability) {
  std::vector<double> p(180, 0.001);
  p[45] = 0.5;
  p[46] = 0.5;
  const Prediction pr = prediction_from_softmax(p);
  EXPECT_EQ(pr.bin, 45u);
  EXPECT_EQ(pr.reliability, 0.5);
  EXPECT_EQ(pr.azimuth_deg, 91.0);
}

TEST(Prediction, MapInputChecks) {
  const Classifier<float> m(ModelConfig{});
  DirectionalMap map(90, 45, 4.0, 2.0);
  EXPECT_THROW(predict_with_reliability(m, map), DataError);
  map.normalized = true;
  const Prediction p = predict_with_reliability(m, map);
  EXPECT_LT(p.bin, 180u);
  DirectionalMap wrong(360, 90, 1.0, 1.0);
  wrong.normalized = true;
  EXPECT_THROW(predict_with_reliability(m, wrong), DataError);
}

TEST(Checkpoint, RoundTripIsExact) {
  Classifier<float> m(ModelConfig{});
  m.initialize(77);
  const std::string bytes = serialize_checkpoint(m);
  EXPECT_EQ(bytes.substr(0, 8), "SRPNCKPT");
  const Classifier<float> back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.config(), m.config());
  for (std::size_t i = 0; i < m.parameters().size(); ++i)
    EXPECT_EQ(back.parameters()[i].values, m.parameters()[i].values);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, CorruptionDetected) {
  const std::string bytes = serialize_checkpoint(Classifier<float>(gradcheck::small_model(3)));
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 1)), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "x"), DataError);
  EXPECT_THROW(deserialize_checkpoint("NOTACKPT" + bytes.substr(8)), DataError);
  std::string v = bytes;
  v[8] = 9;
  EXPECT_THROW(deserialize_checkpoint(v), DataError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), DataError);
}

}  // namespace
}  // namespace srpnet
