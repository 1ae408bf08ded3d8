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

// Finite-difference check of Classifier<double>::backward over every
// parameter of a small randomly initialized model.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "srpnet/dnn.hpp"
#include "srpnet/labels.hpp"

namespace gradcheck {

struct Result {
  std::size_t checked = 0;
  std::size_t passed = 0;
  std::size_t kink_retries = 0;
  std::size_t unresolved_kinks = 0;
  double worst = 0.0;
};

inline srpnet::ModelConfig small_model(std::uint64_t seed) {
  srpnet::ModelConfig c;
  c.input_height = 8;
  c.input_width = 12;
  c.conv_channels = {3, 4};
  c.dense_widths = {16};
  c.seed = seed;
  return c;
}

// Relative error |a - n| / max(|a|, |n|, floor), central differences with
// h = 1e-4 (smaller if the step crosses a ReLU or pooling kink). The loss is
// scaled by the output width; the floor only matters for parameters whose
// gradient is below ~1e-7, where the difference quotient is roundoff.
inline constexpr double kFloor = 1e-7;
inline constexpr double kLossScale = 180.0;

inline Result run(std::uint64_t seed, double tol = 1e-4) {
  using srpnet::Classifier;
  Classifier<double> model(small_model(seed));
  srpnet::Rng rng(seed, 99);
  std::vector<double> x(model.input_size());
  for (auto& v : x) v = rng.uniform();
  const auto label = srpnet::smooth_label(rng.below(180), srpnet::gaussian_kernel(1.0)).probs;
  // Nonzero biases so the check also covers them away from the init point.
  for (std::size_t i = 1; i < model.parameters().size(); i += 2)
    for (double& b : model.parameters()[i].values) b = rng.uniform(-0.05, 0.05);

  Classifier<double>::Workspace ws;
  model.forward(x, ws);
  const auto pattern = model.activation_pattern(ws);
  const auto analytic = model.backward(ws, label, kLossScale);

  auto loss_at = [&](double& p, double value, bool& kink) {
    const double saved = p;
    p = value;
    Classifier<double>::Workspace w;
    const double l = kLossScale * srpnet::mse_loss(model.forward(x, w), label);
    if (model.activation_pattern(w) != pattern) kink = true;
    p = saved;
    return l;
  };

  Result res;
  for (std::size_t t = 0; t < model.parameters().size(); ++t) {
    auto& values = model.parameters()[t].values;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double p0 = values[k];
      const double a = analytic[t][k];
      double h = 1e-4, num = 0.0;
      bool kink = true;
      for (int attempt = 0; attempt < 4 && kink; ++attempt, h /= 10.0) {
        kink = false;
        num = (loss_at(values[k], p0 + h, kink) - loss_at(values[k], p0 - h, kink)) / (2.0 * h);
        if (kink) ++res.kink_retries;
      }
      if (kink) ++res.unresolved_kinks;
      const double err = std::abs(a - num) / std::max({std::abs(a), std::abs(num), kFloor});
      res.worst = std::max(res.worst, err);
      ++res.checked;
      if (err < tol) ++res.passed;
    }
  }
  return res;
}

}  // namespace gradcheck
