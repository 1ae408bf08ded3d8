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

// Steered-response-power directional maps: construction from GCC-PHAT
// pair correlations, block-mean downsampling, min-max normalization, the
// argmax estimator and the peak-to-average reliability score.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "srpnet/array_geometry.hpp"
#include "srpnet/common.hpp"
#include "srpnet/signal_core.hpp"

namespace srpnet {

// Power over a (polar angle, azimuth) grid, stored row-major with one row
// per elevation. Row e is theta = (e + 1) * elevation_resolution_deg,
// column a is phi = a * azimuth_resolution_deg.
struct DirectionalMap {
  std::size_t n_azimuth = 0;
  std::size_t n_elevation = 0;
  double azimuth_resolution_deg = 1.0;
  double elevation_resolution_deg = 1.0;
  bool normalized = false;
  std::vector<double> power;

  DirectionalMap() = default;
  DirectionalMap(std::size_t n_az, std::size_t n_el, double az_res, double el_res)
      : n_azimuth(n_az), n_elevation(n_el), azimuth_resolution_deg(az_res), elevation_resolution_deg(el_res),
        power(n_az * n_el, 0.0) {}

  static DirectionalMap for_grid(const GridSpec& grid) {
    return DirectionalMap(grid.n_azimuth(), grid.n_elevation(), grid.azimuth_resolution_deg,
                          grid.elevation_resolution_deg);
  }

  double& at(std::size_t e, std::size_t a) { return power[e * n_azimuth + a]; }
  double at(std::size_t e, std::size_t a) const { return power[e * n_azimuth + a]; }
  double azimuth(std::size_t a) const { return static_cast<double>(a) * azimuth_resolution_deg; }
  double elevation(std::size_t e) const { return static_cast<double>(e + 1) * elevation_resolution_deg; }
  bool empty() const { return power.empty(); }
};

struct SrpEstimate {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double reliability = 0.0;
};

// Builds maps for frames of a fixed length against one steering table. The
// fractional-lag readout (index + interpolation weight) is precomputed.
class SrpMapper {
 public:
  SrpMapper(const SteeringDelayTable& table, std::size_t frame_length, double floor_epsilon = kDefaultPhatFloor)
      : table_(table), plan_(frame_length), floor_epsilon_(floor_epsilon) {
    if (frame_length < 2) throw ConfigError("frame length must be >= 2");
    const double center = static_cast<double>(frame_length / 2);
    readout_.resize(table.num_pairs());
    for (std::size_t p = 0; p < table.num_pairs(); ++p) {
      const auto& delays = table.pair_delays(p);
      readout_[p].resize(delays.size());
      for (std::size_t g = 0; g < delays.size(); ++g) {
        const double pos = delays[g] + center;
        double base = std::floor(pos);
        if (base < 0.0 || base + 1.0 > static_cast<double>(frame_length - 1))
          throw ConfigError("steering delay exceeds the correlation window; frame too short for the array");
        readout_[p][g] = {static_cast<std::uint32_t>(base), pos - base};
      }
    }
  }

  std::size_t frame_length() const { return plan_.size(); }
  const SteeringDelayTable& table() const { return table_; }

  // Full-resolution map: sum over pairs m < n of R_mn(tau_mn(theta, phi)).
  DirectionalMap compute(const MultichannelFrame& frame) const {
    if (frame.num_channels() != table_.num_mics())
      throw DataError("frame has " + std::to_string(frame.num_channels()) + " channels, steering table expects " +
                      std::to_string(table_.num_mics()));
    if (frame.sample_rate != table_.sample_rate()) throw DataError("frame sample rate differs from steering table");
    if (frame.length() != plan_.size()) throw DataError("frame length differs from mapper frame length");
    for (const auto& ch : frame.channels)
      if (ch.size() != plan_.size()) throw DataError("ragged frame channels");

    std::vector<Spectrum> spectra;
    spectra.reserve(frame.num_channels());
    for (const auto& ch : frame.channels) spectra.push_back(dft_forward(ch, plan_));

    DirectionalMap map = DirectionalMap::for_grid(table_.grid());
    for (std::size_t p = 0; p < table_.num_pairs(); ++p) {
      const auto [m, n] = table_.pairs()[p];
      const CrossCorrelation cc = gcc_phat(spectra[m], spectra[n], plan_, floor_epsilon_);
      const double* r = cc.values.data();
      const auto& ro = readout_[p];
      for (std::size_t g = 0; g < ro.size(); ++g) {
        const double lo = r[ro[g].index];
        map.power[g] += lo + (r[ro[g].index + 1] - lo) * ro[g].frac;
      }
    }
    return map;
  }

 private:
  struct Readout {
    std::uint32_t index;
    double frac;
  };

  SteeringDelayTable table_;
  FftPlan plan_;
  double floor_epsilon_;
  std::vector<std::vector<Readout>> readout_;
};

inline DirectionalMap compute_srp_map(const MultichannelFrame& frame, const SteeringDelayTable& table,
                                      double floor_epsilon = kDefaultPhatFloor) {
  return SrpMapper(table, frame.length(), floor_epsilon).compute(frame);
}

// Block mean over az_factor x el_factor cells (4 x 2 takes 360x90 to 90x45).
inline DirectionalMap downsample_map(const DirectionalMap& map, std::size_t az_factor = 4,
                                     std::size_t el_factor = 2) {
  if (az_factor == 0 || el_factor == 0) throw ConfigError("downsample factors must be positive");
  if (map.n_azimuth % az_factor != 0 || map.n_elevation % el_factor != 0)
    throw ConfigError("downsample factors must divide the map dimensions");
  DirectionalMap out(map.n_azimuth / az_factor, map.n_elevation / el_factor,
                     map.azimuth_resolution_deg * static_cast<double>(az_factor),
                     map.elevation_resolution_deg * static_cast<double>(el_factor));
  out.normalized = false;
  const double inv = 1.0 / static_cast<double>(az_factor * el_factor);
  for (std::size_t e = 0; e < out.n_elevation; ++e) {
    for (std::size_t a = 0; a < out.n_azimuth; ++a) {
      double sum = 0.0;
      for (std::size_t de = 0; de < el_factor; ++de)
        for (std::size_t da = 0; da < az_factor; ++da) sum += map.at(e * el_factor + de, a * az_factor + da);
      out.at(e, a) = sum * inv;
    }
  }
  return out;
}

// Min-max normalization to [0, 1]. A constant map becomes all zeros.
inline DirectionalMap normalize_map(const DirectionalMap& map) {
  if (map.empty()) throw DataError("normalize_map: empty map");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : map.power) {
    if (std::isnan(v)) throw DataError("normalize_map: NaN in map");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw DataError("normalize_map: non-finite map");
  DirectionalMap out = map;
  out.normalized = true;
  const double range = hi - lo;
  for (double& v : out.power) v = range > 0.0 ? (v - lo) / range : 0.0;
  return out;
}

// Grid direction of maximum power; ties resolve to the smallest elevation
// index, then the smallest azimuth index.
inline SrpEstimate srp_argmax(const DirectionalMap& map) {
  if (map.empty()) throw DataError("srp_argmax: empty map");
  std::size_t best = 0;
  for (std::size_t i = 1; i < map.power.size(); ++i)
    if (map.power[i] > map.power[best]) best = i;
  SrpEstimate est;
  est.azimuth_deg = map.azimuth(best % map.n_azimuth);
  est.elevation_deg = map.elevation(best / map.n_azimuth);
  return est;
}

inline std::optional<std::size_t> elevation_row(const DirectionalMap& map, double elevation_deg) {
  for (std::size_t e = 0; e < map.n_elevation; ++e)
    if (std::abs(map.elevation(e) - elevation_deg) < 1e-9) return e;
  return std::nullopt;
}

// Peak-to-average ratio of the row at `speaker_elevation_deg`.
inline double srp_reliability(const DirectionalMap& map, double speaker_elevation_deg = 90.0) {
  const auto row = elevation_row(map, speaker_elevation_deg);
  if (!row) throw DataError("srp_reliability: no grid row at the requested elevation");
  double peak = -std::numeric_limits<double>::infinity(), sum = 0.0;
  for (std::size_t a = 0; a < map.n_azimuth; ++a) {
    const double v = map.at(*row, a);
    peak = std::max(peak, v);
    sum += v;
  }
  const double mean = sum / static_cast<double>(map.n_azimuth);
  if (!(mean > 0.0)) throw DataError("srp_reliability: row mean is not positive (degenerate map)");
  return peak / mean;
}

// Binary map record: 16-byte header ("SRPM", n_az, n_el, flags), then
// n_el * n_az little-endian float32 values, elevation-major.
inline constexpr char kMapMagic[4] = {'S', 'R', 'P', 'M'};
inline constexpr std::uint32_t kMapFlagNormalized = 1u;

namespace map_detail {
inline void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
inline std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}
}  // namespace map_detail

inline void write_map(std::ostream& os, const DirectionalMap& map) {
  os.write(kMapMagic, 4);
  map_detail::put_u32(os, static_cast<std::uint32_t>(map.n_azimuth));
  map_detail::put_u32(os, static_cast<std::uint32_t>(map.n_elevation));
  map_detail::put_u32(os, map.normalized ? kMapFlagNormalized : 0u);
  for (double v : map.power) {
    const float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    map_detail::put_u32(os, u);
  }
  if (!os) throw DataError("write_map: stream error");
}

// Reads one record; returns nullopt at a clean end of stream.
inline std::optional<DirectionalMap> read_map(std::istream& is) {
  unsigned char header[16];
  is.read(reinterpret_cast<char*>(header), 16);
  if (is.gcount() == 0) return std::nullopt;
  if (is.gcount() != 16 || std::memcmp(header, kMapMagic, 4) != 0) throw DataError("read_map: bad map header");
  const std::uint32_t n_az = map_detail::get_u32(header + 4);
  const std::uint32_t n_el = map_detail::get_u32(header + 8);
  const std::uint32_t flags = map_detail::get_u32(header + 12);
  if (n_az == 0 || n_el == 0 || 360 % n_az != 0 || 90 % n_el != 0)
    throw DataError("read_map: unsupported grid " + std::to_string(n_az) + "x" + std::to_string(n_el));
  DirectionalMap map(n_az, n_el, 360.0 / n_az, 90.0 / n_el);
  map.normalized = (flags & kMapFlagNormalized) != 0;
  std::vector<unsigned char> body(static_cast<std::size_t>(n_az) * n_el * 4);
  is.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()));
  if (static_cast<std::size_t>(is.gcount()) != body.size()) throw DataError("read_map: truncated map body");
  for (std::size_t i = 0; i < map.power.size(); ++i) {
    const std::uint32_t u = map_detail::get_u32(body.data() + 4 * i);
    float f;
    std::memcpy(&f, &u, 4);
    map.power[i] = f;
  }
  return map;
}

// Debug export: header row of azimuths, then one row per elevation.
inline void write_map_csv(std::ostream& os, const DirectionalMap& map) {
  char buf[32];
  os << "theta_deg";
  for (std::size_t a = 0; a < map.n_azimuth; ++a) {
    std::snprintf(buf, sizeof buf, ",%.6g", map.azimuth(a));
    os << buf;
  }
  os << '\n';
  for (std::size_t e = 0; e < map.n_elevation; ++e) {
    std::snprintf(buf, sizeof buf, "%.6g", map.elevation(e));
    os << buf;
    for (std::size_t a = 0; a < map.n_azimuth; ++a) {
      std::snprintf(buf, sizeof buf, ",%.6g", map.at(e, a));
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace srpnet
