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

// Localization metrics and reliability-ranked selection.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "srpnet/common.hpp"

namespace srpnet {

enum class Method { kSrp, kDnn };

inline std::string method_name(Method m) { return m == Method::kSrp ? "srp_phat" : "dnn"; }

struct EvalRecord {
  double predicted_azimuth_deg = 0.0;
  double true_azimuth_deg = 0.0;
  double reliability = 0.0;
  Method method = Method::kDnn;
  std::uint64_t frame_id = 0;
};

struct CurvePoint {
  double top_percent = 100.0;
  double accuracy = 0.0;
  double mae = 0.0;
  double sigma = 0.0;
};

inline constexpr double kDefaultAccuracyMarginDeg = 5.0;

// Circular distance in degrees, in [0, 180].
inline double angular_error(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 360.0 - d);
}

inline double mae(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw DataError("mae: no records");
  double sum = 0.0;
  for (const auto& r : records) sum += angular_error(r.predicted_azimuth_deg, r.true_azimuth_deg);
  return sum / static_cast<double>(records.size());
}

// Fraction of records with error strictly below delta.
inline double accuracy(const std::vector<EvalRecord>& records, double delta_deg = kDefaultAccuracyMarginDeg) {
  if (records.empty()) throw DataError("accuracy: no records");
  if (!(delta_deg > 0.0)) throw ConfigError("accuracy: delta must be positive");
  std::size_t hits = 0;
  for (const auto& r : records)
    if (angular_error(r.predicted_azimuth_deg, r.true_azimuth_deg) < delta_deg) ++hits;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

// Records ranked by reliability (descending, ties by frame_id ascending).
inline std::vector<EvalRecord> rank_by_reliability(std::vector<EvalRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) {
    if (a.reliability != b.reliability) return a.reliability > b.reliability;
    return a.frame_id < b.frame_id;
  });
  return records;
}

inline std::size_t top_count(std::size_t n, double top_percent) {
  if (!(top_percent > 0.0 && top_percent <= 100.0)) throw ConfigError("top_percent must lie in (0, 100]");
  // Guard against 10% of 10 evaluating to 1.0000000001.
  const double want = static_cast<double>(n) * top_percent / 100.0;
  return std::min(n, static_cast<std::size_t>(std::ceil(want - 1e-9)));
}

// The ceil(N * top_percent / 100) most reliable records.
inline std::vector<EvalRecord> reliability_filter(const std::vector<EvalRecord>& records, double top_percent) {
  std::vector<EvalRecord> ranked = rank_by_reliability(records);
  ranked.resize(top_count(ranked.size(), top_percent));
  return ranked;
}

inline std::vector<double> default_top_percents() {
  std::vector<double> out;
  for (int p = 5; p <= 100; p += 5) out.push_back(p);
  return out;
}

inline std::vector<CurvePoint> accuracy_vs_top_curve(const std::vector<EvalRecord>& records,
                                                     const std::vector<double>& percents = default_top_percents(),
                                                     double delta_deg = kDefaultAccuracyMarginDeg,
                                                     double sigma = 0.0) {
  if (records.empty()) throw DataError("accuracy_vs_top_curve: no records");
  const std::vector<EvalRecord> ranked = rank_by_reliability(records);
  std::vector<CurvePoint> curve;
  for (double p : percents) {
    const std::vector<EvalRecord> subset(ranked.begin(),
                                         ranked.begin() + static_cast<std::ptrdiff_t>(top_count(ranked.size(), p)));
    CurvePoint point;
    point.top_percent = p;
    point.sigma = sigma;
    if (!subset.empty()) {
      point.accuracy = accuracy(subset, delta_deg);
      point.mae = mae(subset);
    }
    curve.push_back(point);
  }
  return curve;
}

}  // namespace srpnet
