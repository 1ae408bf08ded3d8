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

// Experiment configuration: one INI file with a section per subsystem.
//
//   [experiment]  master_seed, output_dir, scenario counts and seed ranges
//   [audio]       sample rate, recording length, framing, source signal
//   [array]       semicircle (radius, mic_count, spacing_deg) or mic0..micN
//   [room]        room, absorption and distance sampling
//   [grid]        steering grid, pooling factors, speaker elevation
//   [labels]      sigma list, kernel radius
//   [model]       conv and dense widths, init seed
//   [train]       optimizer settings
//   [eval]        accuracy margin, top-% list, default sigma

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "srpnet/array_geometry.hpp"
#include "srpnet/common.hpp"
#include "srpnet/dnn.hpp"
#include "srpnet/eval.hpp"
#include "srpnet/labels.hpp"
#include "srpnet/room_sim.hpp"
#include "srpnet/signal_core.hpp"

namespace srpnet {

struct ExperimentConfig {
  // [experiment]
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "srpnet_out";
  std::size_t train_scenarios = 60;
  std::size_t test_scenarios = 10;
  std::uint64_t train_seed_start = 0;
  std::uint64_t test_seed_start = 1000000;
  std::size_t train_frame_stride = 1;
  std::size_t test_frame_stride = 1;

  // [audio]
  double sample_rate = 48000.0;
  double duration_s = 2.5;
  double frame_ms = 32.0;
  double overlap = 0.5;
  WindowKind window = WindowKind::kHann;
  SourceKind source = SourceKind::kSpeechLike;
  bool write_audio = true;

  // [array]
  double array_radius_m = 0.10;
  std::size_t mic_count = 4;
  double mic_spacing_deg = 60.0;
  double speed_of_sound = kDefaultSpeedOfSound;
  std::optional<std::vector<Vec3>> explicit_mics;

  // [room]
  ScenarioConfig room;
  int max_order = -1;

  // [grid]
  GridSpec grid;
  std::size_t pool_azimuth = 4;
  std::size_t pool_elevation = 2;
  double speaker_elevation_deg = 90.0;
  double phat_floor = kDefaultPhatFloor;

  // [labels]
  std::vector<double> sigmas{0.01, 0.2, 1.0, 1.6, 2.4};
  int kernel_radius = 0;  // 0 selects ceil(6 sigma) + 1

  // [model]
  ModelConfig model;

  // [train]
  TrainConfig train;

  // [eval]
  double accuracy_margin_deg = kDefaultAccuracyMarginDeg;
  std::vector<double> top_percents = default_top_percents();
  double sigma = 1.0;

  ArrayGeometry geometry() const {
    if (explicit_mics) return ArrayGeometry(*explicit_mics, speed_of_sound);
    return semicircular_array(array_radius_m, mic_count, mic_spacing_deg, speed_of_sound);
  }

  FrameSpec frames() const { return frame_spec(sample_rate, frame_ms, overlap); }

  std::size_t map_height() const { return grid.n_elevation() / pool_elevation; }
  std::size_t map_width() const { return grid.n_azimuth() / pool_azimuth; }

  void validate() const {
    if (train_scenarios == 0) throw ConfigError("experiment.train_scenarios must be positive");
    if (train_frame_stride == 0 || test_frame_stride == 0) throw ConfigError("frame strides must be positive");
    const std::uint64_t train_end = train_seed_start + train_scenarios;
    const std::uint64_t test_end = test_seed_start + test_scenarios;
    if (test_scenarios > 0 && train_seed_start < test_end && test_seed_start < train_end)
      throw ConfigError("train seed range [" + std::to_string(train_seed_start) + ", " + std::to_string(train_end) +
                        ") overlaps test seed range [" + std::to_string(test_seed_start) + ", " +
                        std::to_string(test_end) + ")");
    if (output_dir.empty()) throw ConfigError("experiment.output_dir must be set");
    if (!(sample_rate > 0.0)) throw ConfigError("audio.sample_rate must be positive");
    if (!(duration_s > 0.0)) throw ConfigError("audio.duration_s must be positive");
    if (!(frame_ms > 0.0)) throw ConfigError("audio.frame_ms must be positive");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("audio.overlap must lie in [0, 1)");
    const FrameSpec fs = frames();
    if (fs.length < 2 || fs.hop == 0) throw ConfigError("frame too short at this sample rate");
    if (frame_count(static_cast<std::size_t>(std::llround(duration_s * sample_rate)), fs) == 0)
      throw ConfigError("recording shorter than one frame");
    (void)geometry();
    room.validate();
    grid.validate();
    if (pool_azimuth == 0 || pool_elevation == 0) throw ConfigError("pooling factors must be positive");
    if (grid.n_azimuth() % pool_azimuth != 0 || grid.n_elevation() % pool_elevation != 0)
      throw ConfigError("pooling factors must divide the grid");
    if (sigmas.empty()) throw ConfigError("labels.sigmas must not be empty");
    for (double s : sigmas)
      if (!(s > 0.0)) throw ConfigError("labels.sigmas entries must be positive");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive, got " + std::to_string(sigma));
    if (kernel_radius < 0) throw ConfigError("labels.kernel_radius must be >= 0");
    model.validate();
    if (model.input_height != map_height() || model.input_width != map_width())
      throw ConfigError("model input does not match the pooled map size");
    train.validate();
    if (!(accuracy_margin_deg > 0.0)) throw ConfigError("eval.accuracy_margin_deg must be positive");
    if (top_percents.empty()) throw ConfigError("eval.top_percents must not be empty");
    for (double p : top_percents)
      if (!(p > 0.0 && p <= 100.0)) throw ConfigError("eval.top_percents entries must lie in (0, 100]");
  }
};

namespace config_detail {

inline std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item.substr(b), &used));
      if (item.find_first_not_of(" \t", b + used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(key + ": cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& key) {
  std::vector<std::size_t> out;
  for (double v : parse_list(text, key)) {
    if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(key + ": entries must be non-negative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <typename V>
std::string join(const std::vector<V>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<V>)
      out += fmt(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

inline std::string vec_text(const Vec3& v) { return fmt(v.x) + ", " + fmt(v.y) + ", " + fmt(v.z); }

// Typed lookup that reports the offending key.
template <typename V>
V get(const boost::property_tree::ptree& tree, const std::string& key, const V& fallback) {
  const auto text = tree.get_optional<std::string>(key);
  if (!text) return fallback;
  const auto value = tree.get_optional<V>(key);
  if (!value) throw ConfigError(key + ": invalid value '" + *text + "'");
  return *value;
}

inline const char* window_name(WindowKind w) {
  switch (w) {
    case WindowKind::kHann:
      return "hann";
    case WindowKind::kHamming:
      return "hamming";
    default:
      return "rectangular";
  }
}

}  // namespace config_detail

namespace config_detail {
inline bool known_key(const std::string& section, const std::string& key) {
  static const std::map<std::string, std::set<std::string>> kKeys = {
      {"experiment",
       {"master_seed", "output_dir", "train_scenarios", "test_scenarios", "train_seed_start", "test_seed_start",
        "train_frame_stride", "test_frame_stride"}},
      {"audio", {"sample_rate", "duration_s", "frame_ms", "overlap", "window", "source", "write_audio"}},
      {"array", {"speed_of_sound", "radius", "mic_count", "spacing_deg"}},
      {"room",
       {"dims_min", "dims_max", "absorption_min", "absorption_max", "wall_margin", "distance_min_factor",
        "distance_max_factor", "max_attempts", "max_order"}},
      {"grid",
       {"azimuth_resolution", "elevation_resolution", "pool_azimuth", "pool_elevation", "speaker_elevation",
        "phat_floor"}},
      {"labels", {"sigmas", "kernel_radius"}},
      {"model", {"conv_channels", "dense_widths", "seed"}},
      {"train", {"optimizer", "learning_rate", "momentum", "batch_size", "epochs", "seed", "threads"}},
      {"eval", {"accuracy_margin_deg", "top_percents", "sigma"}},
  };
  if (section == "array" && key.size() > 3 && key.compare(0, 3, "mic") == 0 &&
      std::all_of(key.begin() + 3, key.end(), [](unsigned char ch) { return std::isdigit(ch); }))
    return true;
  const auto it = kKeys.find(section);
  return it != kKeys.end() && it->second.count(key) > 0;
}
}  // namespace config_detail

inline ExperimentConfig config_from_ptree(const boost::property_tree::ptree& t) {
  using config_detail::get;
  static const char* kSections[] = {"experiment", "audio", "array", "room", "grid",
                                    "labels",     "model", "train", "eval"};
  for (const auto& [name, child] : t) {
    if (child.empty()) throw ConfigError("key '" + name + "' outside of any section");
    bool known = false;
    for (const char* s : kSections) known |= name == s;
    if (!known) throw ConfigError("unknown config section [" + name + "]");
    for (const auto& [key, value] : child) {
      (void)value;
      if (!config_detail::known_key(name, key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
    }
  }

  ExperimentConfig c;
  try {
    c.master_seed = get(t, "experiment.master_seed", c.master_seed);
    c.output_dir = get(t, "experiment.output_dir", c.output_dir.string());
    c.train_scenarios = get(t, "experiment.train_scenarios", c.train_scenarios);
    c.test_scenarios = get(t, "experiment.test_scenarios", c.test_scenarios);
    c.train_seed_start = get(t, "experiment.train_seed_start", c.train_seed_start);
    c.test_seed_start = get(t, "experiment.test_seed_start", c.test_seed_start);
    c.train_frame_stride = get(t, "experiment.train_frame_stride", c.train_frame_stride);
    c.test_frame_stride = get(t, "experiment.test_frame_stride", c.test_frame_stride);

    c.sample_rate = get(t, "audio.sample_rate", c.sample_rate);
    c.duration_s = get(t, "audio.duration_s", c.duration_s);
    c.frame_ms = get(t, "audio.frame_ms", c.frame_ms);
    c.overlap = get(t, "audio.overlap", c.overlap);
    c.window = parse_window(get<std::string>(t, "audio.window", config_detail::window_name(c.window)));
    c.source = parse_source_kind(get<std::string>(t, "audio.source", "speech_like"));
    c.write_audio = get(t, "audio.write_audio", c.write_audio);

    c.speed_of_sound = get(t, "array.speed_of_sound", c.speed_of_sound);
    if (const auto arr = t.get_child_optional("array"); arr && arr->get_optional<std::string>("mic0")) {
      c.explicit_mics = geometry_from_ptree(*arr).mics();
    } else {
      c.array_radius_m = get(t, "array.radius", c.array_radius_m);
      c.mic_count = get(t, "array.mic_count", c.mic_count);
      c.mic_spacing_deg = get(t, "array.spacing_deg", c.mic_spacing_deg);
    }

    if (auto v = t.get_optional<std::string>("room.dims_min")) c.room.dims_min = parse_vec3(*v);
    if (auto v = t.get_optional<std::string>("room.dims_max")) c.room.dims_max = parse_vec3(*v);
    c.room.absorption_min = get(t, "room.absorption_min", c.room.absorption_min);
    c.room.absorption_max = get(t, "room.absorption_max", c.room.absorption_max);
    c.room.wall_margin_m = get(t, "room.wall_margin", c.room.wall_margin_m);
    c.room.distance_min_factor = get(t, "room.distance_min_factor", c.room.distance_min_factor);
    c.room.distance_max_factor = get(t, "room.distance_max_factor", c.room.distance_max_factor);
    c.room.max_attempts = get(t, "room.max_attempts", c.room.max_attempts);
    c.max_order = get(t, "room.max_order", c.max_order);

    c.grid.azimuth_resolution_deg = get(t, "grid.azimuth_resolution", c.grid.azimuth_resolution_deg);
    c.grid.elevation_resolution_deg = get(t, "grid.elevation_resolution", c.grid.elevation_resolution_deg);
    c.pool_azimuth = get(t, "grid.pool_azimuth", c.pool_azimuth);
    c.pool_elevation = get(t, "grid.pool_elevation", c.pool_elevation);
    c.speaker_elevation_deg = get(t, "grid.speaker_elevation", c.speaker_elevation_deg);
    c.phat_floor = get(t, "grid.phat_floor", c.phat_floor);

    if (auto v = t.get_optional<std::string>("labels.sigmas"))
      c.sigmas = config_detail::parse_list(*v, "labels.sigmas");
    c.kernel_radius = get(t, "labels.kernel_radius", c.kernel_radius);

    if (auto v = t.get_optional<std::string>("model.conv_channels"))
      c.model.conv_channels = config_detail::parse_size_list(*v, "model.conv_channels");
    if (auto v = t.get_optional<std::string>("model.dense_widths"))
      c.model.dense_widths = config_detail::parse_size_list(*v, "model.dense_widths");
    c.model.seed = get(t, "model.seed", c.model.seed);

    c.train.optimizer = parse_optimizer(get<std::string>(
        t, "train.optimizer", c.train.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"));
    c.train.learning_rate = get(t, "train.learning_rate", c.train.learning_rate);
    c.train.momentum = get(t, "train.momentum", c.train.momentum);
    c.train.batch_size = get(t, "train.batch_size", c.train.batch_size);
    c.train.epochs = get(t, "train.epochs", c.train.epochs);
    c.train.seed = get(t, "train.seed", c.train.seed);
    c.train.threads = get(t, "train.threads", c.train.threads);

    c.accuracy_margin_deg = get(t, "eval.accuracy_margin_deg", c.accuracy_margin_deg);
    if (auto v = t.get_optional<std::string>("eval.top_percents"))
      c.top_percents = config_detail::parse_list(*v, "eval.top_percents");
    c.sigma = get(t, "eval.sigma", c.sigma);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  c.model.input_height = c.map_height();
  c.model.input_width = c.map_width();
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig c = config_from_ptree(tree);
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

// Canonical INI text. Round-trips through parse_config.
inline std::string config_to_ini(const ExperimentConfig& c) {
  using config_detail::fmt;
  using config_detail::join;
  std::ostringstream os;
  os << "[experiment]\n"
     << "master_seed = " << c.master_seed << "\n"
     << "output_dir = " << c.output_dir.string() << "\n"
     << "train_scenarios = " << c.train_scenarios << "\n"
     << "test_scenarios = " << c.test_scenarios << "\n"
     << "train_seed_start = " << c.train_seed_start << "\n"
     << "test_seed_start = " << c.test_seed_start << "\n"
     << "train_frame_stride = " << c.train_frame_stride << "\n"
     << "test_frame_stride = " << c.test_frame_stride << "\n\n";
  os << "[audio]\n"
     << "sample_rate = " << fmt(c.sample_rate) << "\n"
     << "duration_s = " << fmt(c.duration_s) << "\n"
     << "frame_ms = " << fmt(c.frame_ms) << "\n"
     << "overlap = " << fmt(c.overlap) << "\n"
     << "window = " << config_detail::window_name(c.window) << "\n"
     << "source = " << (c.source == SourceKind::kWhiteNoise ? "white_noise" : "speech_like") << "\n"
     << "write_audio = " << (c.write_audio ? "true" : "false") << "\n\n";
  os << "[array]\n" << "speed_of_sound = " << fmt(c.speed_of_sound) << "\n";
  if (c.explicit_mics) {
    os << "mic_count = " << c.explicit_mics->size() << "\n";
    for (std::size_t i = 0; i < c.explicit_mics->size(); ++i)
      os << "mic" << i << " = " << config_detail::vec_text((*c.explicit_mics)[i]) << "\n";
  } else {
    os << "radius = " << fmt(c.array_radius_m) << "\n"
       << "mic_count = " << c.mic_count << "\n"
       << "spacing_deg = " << fmt(c.mic_spacing_deg) << "\n";
  }
  os << "\n[room]\n"
     << "dims_min = " << config_detail::vec_text(c.room.dims_min) << "\n"
     << "dims_max = " << config_detail::vec_text(c.room.dims_max) << "\n"
     << "absorption_min = " << fmt(c.room.absorption_min) << "\n"
     << "absorption_max = " << fmt(c.room.absorption_max) << "\n"
     << "wall_margin = " << fmt(c.room.wall_margin_m) << "\n"
     << "distance_min_factor = " << fmt(c.room.distance_min_factor) << "\n"
     << "distance_max_factor = " << fmt(c.room.distance_max_factor) << "\n"
     << "max_attempts = " << c.room.max_attempts << "\n"
     << "max_order = " << c.max_order << "\n\n";
  os << "[grid]\n"
     << "azimuth_resolution = " << fmt(c.grid.azimuth_resolution_deg) << "\n"
     << "elevation_resolution = " << fmt(c.grid.elevation_resolution_deg) << "\n"
     << "pool_azimuth = " << c.pool_azimuth << "\n"
     << "pool_elevation = " << c.pool_elevation << "\n"
     << "speaker_elevation = " << fmt(c.speaker_elevation_deg) << "\n"
     << "phat_floor = " << fmt(c.phat_floor) << "\n\n";
  os << "[labels]\n"
     << "sigmas = " << join(c.sigmas) << "\n"
     << "kernel_radius = " << c.kernel_radius << "\n\n";
  os << "[model]\n"
     << "conv_channels = " << join(c.model.conv_channels) << "\n"
     << "dense_widths = " << join(c.model.dense_widths) << "\n"
     << "seed = " << c.model.seed << "\n\n";
  os << "[train]\n"
     << "optimizer = " << (c.train.optimizer == OptimizerKind::kAdam ? "adam" : "sgd") << "\n"
     << "learning_rate = " << fmt(c.train.learning_rate) << "\n"
     << "momentum = " << fmt(c.train.momentum) << "\n"
     << "batch_size = " << c.train.batch_size << "\n"
     << "epochs = " << c.train.epochs << "\n"
     << "seed = " << c.train.seed << "\n"
     << "threads = " << c.train.threads << "\n\n";
  os << "[eval]\n"
     << "accuracy_margin_deg = " << fmt(c.accuracy_margin_deg) << "\n"
     << "top_percents = " << join(c.top_percents) << "\n"
     << "sigma = " << fmt(c.sigma) << "\n";
  return os.str();
}

}  // namespace srpnet
