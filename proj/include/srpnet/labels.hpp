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

// Gaussian-smoothed azimuth targets over a ring of 2-degree bins.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "srpnet/common.hpp"

namespace srpnet {

inline constexpr std::size_t kAzimuthBins = 180;
inline constexpr double kAzimuthBinWidthDeg = 2.0;

// Normalized discrete Gaussian over integer offsets [-K, K].
struct GaussianKernel {
  double sigma = 1.0;
  int radius = 0;
  std::vector<double> weights;  // weights[k + radius] = G[k]
  double truncated_mass = 0.0;  // upper bound on the dropped tail, relative to the kept mass

  double operator[](int k) const { return weights.at(static_cast<std::size_t>(k + radius)); }
};

inline int default_kernel_radius(double sigma) { return static_cast<int>(std::ceil(6.0 * sigma)) + 1; }

inline GaussianKernel gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian_kernel: sigma must be positive");
  if (radius < 1) throw ConfigError("gaussian_kernel: radius must be >= 1");
  GaussianKernel g;
  g.sigma = sigma;
  g.radius = radius;
  g.weights.resize(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-static_cast<double>(k) * k / (2.0 * sigma * sigma));
    g.weights[static_cast<std::size_t>(k + radius)] = w;
    total += w;
  }
  // The first dropped offset bounds the truncated tail.
  const double next = static_cast<double>(radius + 1);
  const double tail = 2.0 * std::exp(-next * next / (2.0 * sigma * sigma)) / (1.0 - std::exp(-next / (sigma * sigma)));
  g.truncated_mass = tail / total;
  for (double& w : g.weights) w /= total;
  return g;
}

// Default radius ceil(6 sigma) + 1 keeps the truncated tail below 1e-8.
inline GaussianKernel gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian_kernel: sigma must be positive");
  GaussianKernel g = gaussian_kernel(sigma, default_kernel_radius(sigma));
  if (!(g.truncated_mass < 1e-8)) throw ConfigError("gaussian_kernel: truncated mass exceeds 1e-8");
  return g;
}

inline std::size_t azimuth_to_bin(double azimuth_deg, std::size_t n_bins = kAzimuthBins) {
  if (!(azimuth_deg >= 0.0 && azimuth_deg < 360.0)) throw std::invalid_argument("azimuth must lie in [0, 360)");
  const double width = 360.0 / static_cast<double>(n_bins);
  return static_cast<std::size_t>(std::floor(azimuth_deg / width)) % n_bins;
}

inline double bin_center_deg(std::size_t bin, std::size_t n_bins = kAzimuthBins) {
  const double width = 360.0 / static_cast<double>(n_bins);
  return width * static_cast<double>(bin) + width / 2.0;
}

struct LabelVector {
  std::vector<double> probs;
  std::size_t true_bin = 0;
};

// Circular convolution of the one-hot target with the kernel.
inline LabelVector smooth_label(std::size_t true_bin, const GaussianKernel& kernel,
                                std::size_t n_bins = kAzimuthBins) {
  if (true_bin >= n_bins) throw std::invalid_argument("smooth_label: bin out of range");
  LabelVector label;
  label.true_bin = true_bin;
  label.probs.assign(n_bins, 0.0);
  const auto n = static_cast<long>(n_bins);
  for (int k = -kernel.radius; k <= kernel.radius; ++k) {
    const long idx = ((static_cast<long>(true_bin) + k) % n + n) % n;
    label.probs[static_cast<std::size_t>(idx)] += kernel[k];
  }
  return label;
}

}  // namespace srpnet
