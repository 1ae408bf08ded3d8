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

// Convolutional azimuth classifier over directional maps.
//
// Architecture: a stack of blocks (3x3 same-padded convolution, ReLU,
// 2x2 max pooling with floor), then fully connected ReLU layers and a
// linear output layer followed by softmax. Training minimizes the mean
// squared error between the softmax output and a soft target distribution.
//
// The network is templated on the parameter scalar: float for training,
// double for finite-difference gradient checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "srpnet/common.hpp"
#include "srpnet/labels.hpp"
#include "srpnet/srp_map.hpp"

namespace srpnet {

template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)),
        values(std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>()), T(0)) {}

  std::size_t size() const { return values.size(); }
};

struct ModelConfig {
  std::size_t input_height = 45;
  std::size_t input_width = 90;
  std::vector<std::size_t> conv_channels{8, 16, 32, 64};
  std::vector<std::size_t> dense_widths{256};  // hidden layers; the output layer is added on top
  std::size_t output_width = kAzimuthBins;
  std::uint64_t seed = 1;

  void validate() const {
    if (input_height == 0 || input_width == 0) throw ConfigError("model input must be non-empty");
    if (output_width != kAzimuthBins)
      throw ConfigError("model output width must be " + std::to_string(kAzimuthBins));
    std::size_t h = input_height, w = input_width;
    for (std::size_t c : conv_channels) {
      if (c == 0) throw ConfigError("conv channel count must be positive");
      h /= 2;
      w /= 2;
      if (h == 0 || w == 0) throw ConfigError("too many pooling stages for the input size");
    }
    for (std::size_t d : dense_widths)
      if (d == 0) throw ConfigError("dense width must be positive");
  }

  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
using Gradients = std::vector<std::vector<T>>;

template <typename T>
class Classifier {
 public:
  // Activations cached by forward() for backward().
  struct Workspace {
    std::vector<std::vector<T>> block_in;   // per conv block input
    std::vector<std::vector<T>> conv_out;   // post-ReLU conv output
    std::vector<std::vector<std::uint32_t>> pool_idx;
    std::vector<std::vector<T>> dense_in;   // per dense layer input (hidden + output)
    std::vector<T> logits;
    std::vector<double> softmax;
  };

  explicit Classifier(const ModelConfig& config) : config_(config) {
    config_.validate();
    std::size_t c_in = 1, h = config_.input_height, w = config_.input_width;
    for (std::size_t c : config_.conv_channels) {
      blocks_.push_back({c_in, c, h, w});
      params_.emplace_back(std::vector<std::size_t>{c, c_in, 3, 3});
      params_.emplace_back(std::vector<std::size_t>{c});
      c_in = c;
      h /= 2;
      w /= 2;
    }
    std::size_t in = c_in * h * w;
    std::vector<std::size_t> widths = config_.dense_widths;
    widths.push_back(config_.output_width);
    for (std::size_t out : widths) {
      dense_.push_back({in, out});
      params_.emplace_back(std::vector<std::size_t>{out, in});
      params_.emplace_back(std::vector<std::size_t>{out});
      in = out;
    }
    initialize(config_.seed);
  }

  const ModelConfig& config() const { return config_; }
  std::vector<Tensor<T>>& parameters() { return params_; }
  const std::vector<Tensor<T>>& parameters() const { return params_; }
  std::size_t num_conv_blocks() const { return blocks_.size(); }
  std::size_t num_dense_layers() const { return dense_.size(); }
  std::size_t input_size() const { return config_.input_height * config_.input_width; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
  }

  // He-uniform weights, zero biases.
  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = 0; i < params_.size(); i += 2) {
      const auto& shape = params_[i].shape;
      const std::size_t fan_in = shape.size() == 4 ? shape[1] * 9 : shape[1];
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (T& v : params_[i].values) v = static_cast<T>(rng.uniform(-bound, bound));
      std::fill(params_[i + 1].values.begin(), params_[i + 1].values.end(), T(0));
    }
  }

  // Softmax over the output bins. Thread-safe: all state lives in `ws`.
  const std::vector<double>& forward(std::span<const T> input, Workspace& ws) const {
    if (input.size() != input_size())
      throw DataError("model input has " + std::to_string(input.size()) + " values, expected " +
                      std::to_string(input_size()));
    ws.block_in.resize(blocks_.size());
    ws.conv_out.resize(blocks_.size());
    ws.pool_idx.resize(blocks_.size());
    ws.dense_in.resize(dense_.size());

    std::vector<T> x(input.begin(), input.end());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Block& blk = blocks_[b];
      ws.block_in[b] = std::move(x);
      conv_forward(blk, params_[2 * b].values.data(), params_[2 * b + 1].values.data(), ws.block_in[b].data(),
                   ws.conv_out[b]);
      for (T& v : ws.conv_out[b]) v = v > T(0) ? v : T(0);
      pool_forward(blk, ws.conv_out[b], x, ws.pool_idx[b]);
    }
    for (std::size_t d = 0; d < dense_.size(); ++d) {
      const Dense& layer = dense_[d];
      ws.dense_in[d] = std::move(x);
      const std::size_t pi = 2 * blocks_.size() + 2 * d;
      x.assign(layer.out, T(0));
      dense_forward(layer, params_[pi].values.data(), params_[pi + 1].values.data(), ws.dense_in[d].data(), x.data());
      if (d + 1 < dense_.size())
        for (T& v : x) v = v > T(0) ? v : T(0);
    }
    ws.logits = std::move(x);
    softmax_into(ws.logits, ws.softmax);
    return ws.softmax;
  }

  std::vector<double> forward(std::span<const T> input) const {
    Workspace ws;
    return forward(input, ws);
  }

  // Gradients of loss_scale * MSE(softmax, target) for the input cached in
  // `ws`.
  Gradients<T> backward(const Workspace& ws, std::span<const double> target, double loss_scale = 1.0) const {
    if (target.size() != config_.output_width) throw DataError("target width does not match model output");
    if (ws.softmax.size() != config_.output_width) throw std::logic_error("backward called before forward");
    const std::size_t k = ws.softmax.size();
    const std::vector<double>& p = ws.softmax;

    // dL/dp for L = (1/K) sum (p - y)^2, then through the softmax Jacobian.
    std::vector<double> dp(k);
    double dot = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      dp[i] = loss_scale * 2.0 * (p[i] - target[i]) / static_cast<double>(k);
      dot += dp[i] * p[i];
    }
    std::vector<T> g(k);
    for (std::size_t i = 0; i < k; ++i) g[i] = static_cast<T>(p[i] * (dp[i] - dot));

    Gradients<T> grads(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) grads[i].assign(params_[i].size(), T(0));

    for (std::size_t d = dense_.size(); d-- > 0;) {
      const Dense& layer = dense_[d];
      const std::size_t pi = 2 * blocks_.size() + 2 * d;
      const std::vector<T>& in = ws.dense_in[d];
      std::vector<T> g_in(layer.in, T(0));
      dense_backward(layer, params_[pi].values.data(), in.data(), g.data(), grads[pi].data(), grads[pi + 1].data(),
                     g_in.data());
      // ReLU of the previous dense layer (its output is this layer's input).
      if (d > 0)
        for (std::size_t i = 0; i < layer.in; ++i)
          if (!(in[i] > T(0))) g_in[i] = T(0);
      g = std::move(g_in);
    }

    for (std::size_t b = blocks_.size(); b-- > 0;) {
      const Block& blk = blocks_[b];
      std::vector<T> g_conv(blk.c_out * blk.h * blk.w, T(0));
      const auto& idx = ws.pool_idx[b];
      for (std::size_t i = 0; i < idx.size(); ++i) g_conv[idx[i]] += g[i];
      const auto& act = ws.conv_out[b];
      for (std::size_t i = 0; i < g_conv.size(); ++i)
        if (!(act[i] > T(0))) g_conv[i] = T(0);
      std::vector<T> g_in;
      if (b > 0) g_in.assign(blk.c_in * blk.h * blk.w, T(0));
      conv_backward(blk, params_[2 * b].values.data(), ws.block_in[b].data(), g_conv.data(), grads[2 * b].data(),
                    grads[2 * b + 1].data(), b > 0 ? g_in.data() : nullptr);
      g = std::move(g_in);
    }
    return grads;
  }

  // ReLU on/off states and pooling winners; a change between two inputs or
  // parameter settings means a kink was crossed.
  std::vector<std::uint32_t> activation_pattern(const Workspace& ws) const {
    std::vector<std::uint32_t> sig;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      for (T v : ws.conv_out[b]) sig.push_back(v > T(0));
      sig.insert(sig.end(), ws.pool_idx[b].begin(), ws.pool_idx[b].end());
    }
    for (std::size_t d = 1; d < dense_.size(); ++d)
      for (T v : ws.dense_in[d]) sig.push_back(v > T(0));
    return sig;
  }

  template <typename U>
  Classifier<U> cast() const {
    Classifier<U> out(config_);
    for (std::size_t i = 0; i < params_.size(); ++i)
      for (std::size_t j = 0; j < params_[i].size(); ++j)
        out.parameters()[i].values[j] = static_cast<U>(params_[i].values[j]);
    return out;
  }

 private:
  struct Block {
    std::size_t c_in, c_out, h, w;
  };
  struct Dense {
    std::size_t in, out;
  };

  static void softmax_into(const std::vector<T>& logits, std::vector<double>& out) {
    out.resize(logits.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (T v : logits) mx = std::max(mx, static_cast<double>(v));
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      out[i] = std::exp(static_cast<double>(logits[i]) - mx);
      sum += out[i];
    }
    for (double& v : out) v /= sum;
  }

  static void conv_forward(const Block& blk, const T* weight, const T* bias, const T* in, std::vector<T>& out) {
    const std::size_t h = blk.h, w = blk.w, plane = h * w;
    out.assign(blk.c_out * plane, T(0));
    for (std::size_t o = 0; o < blk.c_out; ++o) {
      T* dst = out.data() + o * plane;
      std::fill(dst, dst + plane, bias[o]);
      for (std::size_t i = 0; i < blk.c_in; ++i) {
        const T* src = in + i * plane;
        const T* k = weight + (o * blk.c_in + i) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          const std::size_t y0 = dy < 0 ? 1 : 0, y1 = dy > 0 ? h - 1 : h;
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const std::size_t x0 = dx < 0 ? 1 : 0, x1 = dx > 0 ? w - 1 : w;
            const T kv = k[ky * 3 + kx];
            for (std::size_t y = y0; y < y1; ++y) {
              T* drow = dst + y * w;
              const T* srow = src + (y + dy) * w + dx;
              for (std::size_t x = x0; x < x1; ++x) drow[x] += kv * srow[x];
            }
          }
        }
      }
    }
  }

  static void conv_backward(const Block& blk, const T* weight, const T* in, const T* g_out, T* g_weight, T* g_bias,
                            T* g_in) {
    const std::size_t h = blk.h, w = blk.w, plane = h * w;
    for (std::size_t o = 0; o < blk.c_out; ++o) {
      const T* go = g_out + o * plane;
      T acc = T(0);
      for (std::size_t j = 0; j < plane; ++j) acc += go[j];
      g_bias[o] += acc;
      for (std::size_t i = 0; i < blk.c_in; ++i) {
        const T* src = in + i * plane;
        const T* k = weight + (o * blk.c_in + i) * 9;
        T* gk = g_weight + (o * blk.c_in + i) * 9;
        T* gi = g_in ? g_in + i * plane : nullptr;
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          const std::size_t y0 = dy < 0 ? 1 : 0, y1 = dy > 0 ? h - 1 : h;
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const std::size_t x0 = dx < 0 ? 1 : 0, x1 = dx > 0 ? w - 1 : w;
            const T kv = k[ky * 3 + kx];
            T sum = T(0);
            for (std::size_t y = y0; y < y1; ++y) {
              const T* grow = go + y * w;
              const T* srow = src + (y + dy) * w + dx;
              for (std::size_t x = x0; x < x1; ++x) sum += grow[x] * srow[x];
              if (gi) {
                T* girow = gi + (y + dy) * w + dx;
                for (std::size_t x = x0; x < x1; ++x) girow[x] += kv * grow[x];
              }
            }
            gk[ky * 3 + kx] += sum;
          }
        }
      }
    }
  }

  static void pool_forward(const Block& blk, const std::vector<T>& in, std::vector<T>& out,
                           std::vector<std::uint32_t>& idx) {
    const std::size_t h2 = blk.h / 2, w2 = blk.w / 2;
    out.assign(blk.c_out * h2 * w2, T(0));
    idx.assign(out.size(), 0);
    for (std::size_t c = 0; c < blk.c_out; ++c) {
      for (std::size_t y = 0; y < h2; ++y) {
        for (std::size_t x = 0; x < w2; ++x) {
          std::size_t best = (c * blk.h + 2 * y) * blk.w + 2 * x;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t j = (c * blk.h + 2 * y + dy) * blk.w + 2 * x + dx;
              if (in[j] > in[best]) best = j;
            }
          const std::size_t o = (c * h2 + y) * w2 + x;
          out[o] = in[best];
          idx[o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }

  static void dense_forward(const Dense& layer, const T* weight, const T* bias, const T* in, T* out) {
    for (std::size_t o = 0; o < layer.out; ++o) {
      const T* row = weight + o * layer.in;
      T acc = T(0);
      for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * in[i];
      out[o] = acc + bias[o];
    }
  }

  static void dense_backward(const Dense& layer, const T* weight, const T* in, const T* g_out, T* g_weight,
                             T* g_bias, T* g_in) {
    for (std::size_t o = 0; o < layer.out; ++o) {
      const T go = g_out[o];
      g_bias[o] += go;
      if (go == T(0)) continue;
      const T* row = weight + o * layer.in;
      T* grow = g_weight + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) {
        grow[i] += go * in[i];
        g_in[i] += row[i] * go;
      }
    }
  }

  ModelConfig config_;
  std::vector<Block> blocks_;
  std::vector<Dense> dense_;
  std::vector<Tensor<T>> params_;
};

inline double mse_loss(std::span<const double> softmax, std::span<const double> label) {
  if (softmax.size() != label.size()) throw DataError("mse_loss: length mismatch");
  if (softmax.empty()) throw DataError("mse_loss: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < softmax.size(); ++i) {
    const double d = softmax[i] - label[i];
    sum += d * d;
  }
  return sum / static_cast<double>(softmax.size());
}

struct Prediction {
  std::size_t bin = 0;
  double azimuth_deg = 0.0;
  double reliability = 0.0;
  std::vector<double> softmax;
};

// Argmax bin (lowest index on ties) and its softmax value as reliability.
inline Prediction prediction_from_softmax(std::vector<double> softmax) {
  Prediction p;
  p.bin = static_cast<std::size_t>(std::max_element(softmax.begin(), softmax.end()) - softmax.begin());
  p.reliability = softmax[p.bin];
  p.azimuth_deg = bin_center_deg(p.bin, softmax.size());
  p.softmax = std::move(softmax);
  return p;
}

template <typename T>
std::vector<T> map_to_input(const DirectionalMap& map, const ModelConfig& config) {
  if (map.n_elevation != config.input_height || map.n_azimuth != config.input_width)
    throw DataError("map is " + std::to_string(map.n_elevation) + "x" + std::to_string(map.n_azimuth) +
                    ", model expects " + std::to_string(config.input_height) + "x" +
                    std::to_string(config.input_width));
  if (!map.normalized) throw DataError("model input map must be normalized");
  return std::vector<T>(map.power.begin(), map.power.end());
}

template <typename T>
Prediction predict_with_reliability(const Classifier<T>& model, const DirectionalMap& map) {
  const std::vector<T> input = map_to_input<T>(map, model.config());
  return prediction_from_softmax(model.forward(input));
}

// ---------------------------------------------------------------- training

enum class OptimizerKind { kSgdMomentum, kAdam };

inline OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgdMomentum;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + name + "' (sgd|adam)");
}

struct TrainConfig {
  std::size_t epochs = 12;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  double momentum = 0.9;  // sgd only
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const {
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (threads == 0) throw ConfigError("threads must be positive");
  }
};

// Training examples: flattened normalized maps plus soft targets.
struct Dataset {
  std::vector<std::vector<float>> inputs;
  std::vector<std::vector<double>> targets;
  std::vector<std::size_t> true_bins;

  std::size_t size() const { return inputs.size(); }
};

struct TrainResult {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;  // training-set argmax accuracy measured during the epoch
};

namespace train_detail {

// Per-example gradients land in their own slot and are reduced in index
// order, so results do not depend on the thread count.
template <typename T>
void batch_gradients(const Classifier<T>& model, const Dataset& data, std::span<const std::size_t> batch,
                     std::size_t threads, std::vector<std::vector<double>>& sum, double& loss_sum,
                     std::size_t& hits) {
  std::vector<Gradients<T>> per_example(batch.size());
  std::vector<double> losses(batch.size());
  std::vector<std::uint8_t> correct(batch.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    typename Classifier<T>::Workspace ws;
    for (std::size_t j = begin; j < end; ++j) {
      const std::size_t ex = batch[j];
      std::vector<T> input(data.inputs[ex].begin(), data.inputs[ex].end());
      const std::vector<double>& p = model.forward(input, ws);
      losses[j] = mse_loss(p, data.targets[ex]);
      const auto arg = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      correct[j] = arg == data.true_bins[ex];
      per_example[j] = model.backward(ws, data.targets[ex]);
    }
  };
  const std::size_t n_threads = std::min(threads, batch.size());
  if (n_threads <= 1) {
    work(0, batch.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (batch.size() + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(batch.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  for (auto& s : sum) std::fill(s.begin(), s.end(), 0.0);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const auto& g = per_example[j][i];
      for (std::size_t k = 0; k < g.size(); ++k) sum[i][k] += static_cast<double>(g[k]);
    }
    loss_sum += losses[j];
    hits += correct[j];
  }
}

}  // namespace train_detail

// Mini-batch training with a per-epoch shuffle drawn from (seed, epoch).
// Throws DivergenceError when the loss stops being finite.
template <typename T>
TrainResult train(Classifier<T>& model, const Dataset& data, const TrainConfig& config,
                  const std::function<void(std::size_t, double)>& on_epoch = {}) {
  config.validate();
  if (data.size() == 0) throw DataError("train: empty dataset");
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.inputs[i].size() != model.input_size() || data.targets[i].size() != model.config().output_width)
      throw DataError("train: example " + std::to_string(i) + " does not match the model shape");

  auto& params = model.parameters();
  std::vector<std::vector<double>> grad(params.size()), m1(params.size()), m2(params.size()), master(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    grad[i].assign(params[i].size(), 0.0);
    m1[i].assign(params[i].size(), 0.0);
    m2[i].assign(params[i].size(), 0.0);
    master[i].assign(params[i].values.begin(), params[i].values.end());
  }

  TrainResult result;
  std::vector<std::size_t> order(data.size());
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed, epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      const double before = loss_sum;
      train_detail::batch_gradients(model, data, batch, config.threads, grad, loss_sum, hits);
      if (!std::isfinite(loss_sum - before)) {
        std::ostringstream msg;
        msg << "training diverged: non-finite loss at epoch " << epoch << ", batch starting at example " << start
            << " (learning rate " << config.learning_rate << ")";
        throw DivergenceError(msg.str());
      }
      ++step;
      const double inv = 1.0 / static_cast<double>(batch.size());
      const double lr = config.learning_rate;
      for (std::size_t i = 0; i < params.size(); ++i) {
        auto& values = params[i].values;
        for (std::size_t k = 0; k < values.size(); ++k) {
          const double g = grad[i][k] * inv;
          double update;
          if (config.optimizer == OptimizerKind::kSgdMomentum) {
            m1[i][k] = config.momentum * m1[i][k] + g;
            update = lr * m1[i][k];
          } else {
            m1[i][k] = config.adam_beta1 * m1[i][k] + (1.0 - config.adam_beta1) * g;
            m2[i][k] = config.adam_beta2 * m2[i][k] + (1.0 - config.adam_beta2) * g * g;
            const double mh = m1[i][k] / (1.0 - std::pow(config.adam_beta1, static_cast<double>(step)));
            const double vh = m2[i][k] / (1.0 - std::pow(config.adam_beta2, static_cast<double>(step)));
            update = lr * mh / (std::sqrt(vh) + config.adam_epsilon);
          }
          master[i][k] -= update;
          values[k] = static_cast<T>(master[i][k]);
        }
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(data.size());
    result.epoch_loss.push_back(epoch_loss);
    result.epoch_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(data.size()));
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return result;
}

// ------------------------------------------------------------- checkpoints
//
// Layout (little-endian): "SRPNCKPT", u32 version, u32 input_h, u32 input_w,
// u32 n_conv, n_conv x u32 channels, u32 n_dense, n_dense x u32 widths,
// u32 output, u64 seed, u32 n_tensors, then per tensor u32 rank, rank x u32
// dims and the float32 values.

inline constexpr char kCheckpointMagic[8] = {'S', 'R', 'P', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace ckpt_detail {
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw DataError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | static_cast<std::uint64_t>(u32()) << 32;
  }
};
}  // namespace ckpt_detail

inline std::string serialize_checkpoint(const Classifier<float>& model) {
  using namespace ckpt_detail;
  const ModelConfig& c = model.config();
  std::string out(kCheckpointMagic, 8);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(c.input_height));
  put_u32(out, static_cast<std::uint32_t>(c.input_width));
  put_u32(out, static_cast<std::uint32_t>(c.conv_channels.size()));
  for (auto v : c.conv_channels) put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(c.dense_widths.size()));
  for (auto v : c.dense_widths) put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(c.output_width));
  put_u64(out, c.seed);
  put_u32(out, static_cast<std::uint32_t>(model.parameters().size()));
  for (const auto& t : model.parameters()) {
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (float f : t.values) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(out, u);
    }
  }
  return out;
}

inline Classifier<float> deserialize_checkpoint(const std::string& bytes) {
  ckpt_detail::Reader r{bytes};
  r.need(8);
  if (std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) throw DataError("not a model checkpoint");
  r.pos = 8;
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig c;
  c.input_height = r.u32();
  c.input_width = r.u32();
  c.conv_channels.resize(r.u32());
  for (auto& v : c.conv_channels) v = r.u32();
  c.dense_widths.resize(r.u32());
  for (auto& v : c.dense_widths) v = r.u32();
  c.output_width = r.u32();
  c.seed = r.u64();
  Classifier<float> model(c);
  const std::uint32_t n = r.u32();
  if (n != model.parameters().size()) throw DataError("checkpoint tensor count does not match its architecture");
  for (auto& t : model.parameters()) {
    const std::uint32_t rank = r.u32();
    if (rank != t.shape.size()) throw DataError("checkpoint tensor rank mismatch");
    for (auto d : t.shape)
      if (r.u32() != d) throw DataError("checkpoint tensor shape mismatch");
    r.need(4 * t.size());
    for (float& f : t.values) {
      const std::uint32_t u = r.u32();
      std::memcpy(&f, &u, 4);
    }
  }
  if (r.pos != bytes.size()) throw DataError("trailing bytes after checkpoint");
  return model;
}

inline void save_checkpoint(const std::filesystem::path& path, const Classifier<float>& model) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write checkpoint: " + path.string());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("write failed: " + path.string());
}

inline Classifier<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace srpnet
