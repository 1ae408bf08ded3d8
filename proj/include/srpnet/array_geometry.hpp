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

// Microphone array geometry and far-field steering delays.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "srpnet/common.hpp"

namespace srpnet {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  bool operator==(const Vec3&) const = default;
};

inline constexpr double kDefaultSpeedOfSound = 343.0;

// Microphone positions relative to the array center, in meters.
class ArrayGeometry {
 public:
  ArrayGeometry(std::vector<Vec3> mic_positions, double speed_of_sound = kDefaultSpeedOfSound)
      : mics_(std::move(mic_positions)), speed_of_sound_(speed_of_sound) {
    if (mics_.size() < 2) throw ConfigError("array needs at least two microphones");
    if (!(speed_of_sound_ > 0.0)) throw ConfigError("speed of sound must be positive");
    for (std::size_t i = 0; i < mics_.size(); ++i)
      for (std::size_t j = i + 1; j < mics_.size(); ++j)
        if ((mics_[i] - mics_[j]).norm() <= 0.0) throw ConfigError("microphone positions must be distinct");
  }

  std::size_t size() const { return mics_.size(); }
  const std::vector<Vec3>& mics() const { return mics_; }
  const Vec3& mic(std::size_t i) const { return mics_.at(i); }
  double speed_of_sound() const { return speed_of_sound_; }

  double distance(std::size_t m, std::size_t n) const { return (mic(m) - mic(n)).norm(); }

  double aperture() const {
    double a = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) a = std::max(a, distance(i, j));
    return a;
  }

  // All unordered pairs (m, n) with m < n, in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t m = 0; m < size(); ++m)
      for (std::size_t n = m + 1; n < size(); ++n) out.emplace_back(m, n);
    return out;
  }

  // Positions translated onto `center` (no rotation).
  std::vector<Vec3> placed_at(const Vec3& center) const {
    std::vector<Vec3> out;
    out.reserve(mics_.size());
    for (const auto& p : mics_) out.push_back(p + center);
    return out;
  }

 private:
  std::vector<Vec3> mics_;
  double speed_of_sound_;
};

// Microphones on a circle in the z = 0 plane at azimuths 0, spacing, ...
inline ArrayGeometry semicircular_array(double radius_m = 0.10, std::size_t n_mics = 4,
                                        double spacing_deg = 60.0,
                                        double speed_of_sound = kDefaultSpeedOfSound) {
  if (!(radius_m > 0.0)) throw ConfigError("array radius must be positive");
  if (n_mics < 2) throw ConfigError("array needs at least two microphones");
  if (spacing_deg * static_cast<double>(n_mics - 1) > 360.0)
    throw ConfigError("microphone spacing wraps past 360 degrees");
  std::vector<Vec3> mics;
  for (std::size_t i = 0; i < n_mics; ++i) {
    const double a = deg2rad(spacing_deg * static_cast<double>(i));
    mics.push_back({radius_m * std::cos(a), radius_m * std::sin(a), 0.0});
  }
  return ArrayGeometry(std::move(mics), speed_of_sound);
}

// Unit vector toward (theta, phi): theta is the polar angle from +z,
// phi the azimuth from +x toward +y.
inline Vec3 direction_vector(double theta_deg, double phi_deg) {
  const double t = deg2rad(theta_deg), p = deg2rad(phi_deg);
  return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

// Plane-wave TDOA in samples; positive when mic n hears the wavefront after
// mic m.
inline double far_field_tdoa(const ArrayGeometry& geometry, std::size_t m, std::size_t n,
                             double theta_deg, double phi_deg, double sample_rate) {
  if (m >= geometry.size() || n >= geometry.size()) throw std::out_of_range("far_field_tdoa: mic index");
  if (m == n) throw std::invalid_argument("far_field_tdoa: self-pair has no TDOA");
  const Vec3 u = direction_vector(theta_deg, phi_deg);
  return u.dot(geometry.mic(m) - geometry.mic(n)) / geometry.speed_of_sound() * sample_rate;
}

// Steering grid: azimuth phi_a = a * az_res for a in [0, 360/az_res),
// polar angle theta_e = (e + 1) * el_res for e in [0, 90/el_res).
struct GridSpec {
  double azimuth_resolution_deg = 1.0;
  double elevation_resolution_deg = 1.0;

  std::size_t n_azimuth() const { return checked_count(360.0, azimuth_resolution_deg); }
  std::size_t n_elevation() const { return checked_count(90.0, elevation_resolution_deg); }
  std::size_t size() const { return n_azimuth() * n_elevation(); }
  double azimuth(std::size_t a) const { return static_cast<double>(a) * azimuth_resolution_deg; }
  double elevation(std::size_t e) const { return static_cast<double>(e + 1) * elevation_resolution_deg; }

  void validate() const {
    (void)n_azimuth();
    (void)n_elevation();
  }

 private:
  static std::size_t checked_count(double span, double res) {
    if (!(res > 0.0)) throw ConfigError("grid resolution must be positive");
    const double n = span / res;
    const double r = std::round(n);
    if (r < 1.0 || std::abs(n - r) > 1e-9) throw ConfigError("grid resolution must divide the angular span");
    return static_cast<std::size_t>(r);
  }
};

// TDOAs for every mic pair (m < n) and grid direction, row-major by
// elevation then azimuth.
class SteeringDelayTable {
 public:
  SteeringDelayTable(std::size_t n_mics, GridSpec grid, double sample_rate,
                     std::vector<std::pair<std::size_t, std::size_t>> pairs, std::vector<std::vector<double>> delays)
      : n_mics_(n_mics), grid_(grid), sample_rate_(sample_rate), pairs_(std::move(pairs)), delays_(std::move(delays)) {}

  std::size_t num_mics() const { return n_mics_; }
  const GridSpec& grid() const { return grid_; }
  double sample_rate() const { return sample_rate_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }
  std::size_t num_pairs() const { return pairs_.size(); }

  const std::vector<double>& pair_delays(std::size_t pair_index) const { return delays_.at(pair_index); }

  // Delay for an ordered pair; (n, m) is the negation of (m, n).
  double delay(std::size_t m, std::size_t n, std::size_t elevation_index, std::size_t azimuth_index) const {
    if (m == n) throw std::invalid_argument("SteeringDelayTable: self-pair");
    const bool swap = m > n;
    const std::size_t lo = swap ? n : m, hi = swap ? m : n;
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      if (pairs_[p].first == lo && pairs_[p].second == hi) {
        const double d = delays_[p].at(elevation_index * grid_.n_azimuth() + azimuth_index);
        return swap ? -d : d;
      }
    }
    throw std::out_of_range("SteeringDelayTable: unknown pair");
  }

 private:
  std::size_t n_mics_;
  GridSpec grid_;
  double sample_rate_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<std::vector<double>> delays_;
};

inline SteeringDelayTable build_delay_table(const ArrayGeometry& geometry, const GridSpec& grid,
                                            double sample_rate) {
  grid.validate();
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be positive");
  const auto pairs = geometry.pairs();
  const std::size_t n_az = grid.n_azimuth(), n_el = grid.n_elevation();
  std::vector<std::vector<double>> delays(pairs.size(), std::vector<double>(n_az * n_el));
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t e = 0; e < n_el; ++e)
      for (std::size_t a = 0; a < n_az; ++a)
        delays[p][e * n_az + a] = far_field_tdoa(geometry, pairs[p].first, pairs[p].second, grid.elevation(e),
                                                 grid.azimuth(a), sample_rate);
  return SteeringDelayTable(geometry.size(), grid, sample_rate, pairs, std::move(delays));
}

// Human-readable block:
//   [array]
//   speed_of_sound = 343.000000
//   mic_count = 4
//   mic0 = 0.100000, 0.000000, 0.000000
inline std::string geometry_to_config(const ArrayGeometry& geometry) {
  std::ostringstream os;
  char buf[128];
  os << "[array]\n";
  std::snprintf(buf, sizeof buf, "speed_of_sound = %.6f\n", geometry.speed_of_sound());
  os << buf << "mic_count = " << geometry.size() << "\n";
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    const Vec3& p = geometry.mic(i);
    std::snprintf(buf, sizeof buf, "mic%zu = %.6f, %.6f, %.6f\n", i, p.x, p.y, p.z);
    os << buf;
  }
  return os.str();
}

inline Vec3 parse_vec3(const std::string& text) {
  Vec3 v;
  char extra = 0;
  if (std::sscanf(text.c_str(), " %lf , %lf , %lf %c", &v.x, &v.y, &v.z, &extra) != 3)
    throw ConfigError("expected 'x, y, z' coordinates, got '" + text + "'");
  return v;
}

// Reads explicit mic positions from an [array] section.
inline ArrayGeometry geometry_from_ptree(const boost::property_tree::ptree& section) {
  const auto count = section.get_optional<std::size_t>("mic_count");
  if (!count) throw ConfigError("array section lacks mic_count");
  std::vector<Vec3> mics;
  for (std::size_t i = 0; i < *count; ++i) {
    const auto text = section.get_optional<std::string>("mic" + std::to_string(i));
    if (!text) throw ConfigError("array section lacks mic" + std::to_string(i));
    mics.push_back(parse_vec3(*text));
  }
  return ArrayGeometry(std::move(mics), section.get<double>("speed_of_sound", kDefaultSpeedOfSound));
}

inline ArrayGeometry geometry_from_config(const std::string& text) {
  std::istringstream is(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed array block: ") + e.what());
  }
  const auto section = tree.get_child_optional("array");
  if (!section) throw ConfigError("missing [array] section");
  return geometry_from_ptree(*section);
}

}  // namespace srpnet
