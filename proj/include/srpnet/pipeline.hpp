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

// Batch commands: generate, train, eval, sweep.
//
// Output layout under ExperimentConfig::output_dir:
//
//   dataset/manifest.json           scenarios, frames, labels, SRP estimates
//   dataset/audio/<split>_NNNN.wav  rendered array recordings (float32)
//   dataset/maps/<split>_NNNN.srpm  pooled, normalized maps, one per frame
//   models/model_sigma<s>_<hash>.ckpt (+ .json sidecar), loss_sigma<s>_<hash>.csv
//   results/eval_sigma<s>_<hash>.json, curve_*.csv, sweep_*.{json,csv}
//
// <hash> is the first 12 hex digits of the manifest's SHA-256.

#pragma once

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "srpnet/array_geometry.hpp"
#include "srpnet/config.hpp"
#include "srpnet/dnn.hpp"
#include "srpnet/eval.hpp"
#include "srpnet/labels.hpp"
#include "srpnet/room_sim.hpp"
#include "srpnet/signal_core.hpp"
#include "srpnet/srp_map.hpp"
#include "srpnet/wav.hpp"

namespace srpnet {

using nlohmann::json;

// ------------------------------------------------------------------ files

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

// Write to a temporary sibling, then rename, so readers never see a
// partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write " + tmp.string() + ": " + std::strerror(errno));
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Rounds to 6 significant digits so JSON output carries no more.
inline double round6(double v) { return std::strtod(fmt6(v).c_str(), nullptr); }

// Rejects concurrent commands on one output directory.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir) : path_(dir / ".srpnet.lock") {
    std::filesystem::create_directories(dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST)
        throw DataError("output directory is locked by another srpnet process (" + path_.string() +
                        "); remove the file if no other process is running");
      throw DataError("cannot create lock file " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    (void)!::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~DirectoryLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct Layout {
  std::filesystem::path root;

  std::filesystem::path dataset() const { return root / "dataset"; }
  std::filesystem::path manifest() const { return dataset() / "manifest.json"; }
  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path results() const { return root / "results"; }

  static std::string tag(double sigma, const std::string& hash) { return "sigma" + fmt6(sigma) + "_" + hash.substr(0, 12); }

  std::filesystem::path checkpoint(double sigma, const std::string& hash) const {
    return models() / ("model_" + tag(sigma, hash) + ".ckpt");
  }
  std::filesystem::path sidecar(double sigma, const std::string& hash) const {
    return models() / ("model_" + tag(sigma, hash) + ".ckpt.json");
  }
  std::filesystem::path loss_csv(double sigma, const std::string& hash) const {
    return models() / ("loss_" + tag(sigma, hash) + ".csv");
  }
  std::filesystem::path eval_json(double sigma, const std::string& hash) const {
    return results() / ("eval_" + tag(sigma, hash) + ".json");
  }
  std::filesystem::path dnn_curve(double sigma, const std::string& hash) const {
    return results() / ("curve_dnn_" + tag(sigma, hash) + ".csv");
  }
  std::filesystem::path srp_curve(const std::string& hash) const {
    return results() / ("curve_srp_phat_" + hash.substr(0, 12) + ".csv");
  }
  std::filesystem::path sweep_json(const std::string& hash) const {
    return results() / ("sweep_summary_" + hash.substr(0, 12) + ".json");
  }
  std::filesystem::path sweep_csv(const std::string& hash) const {
    return results() / ("sweep_curves_" + hash.substr(0, 12) + ".csv");
  }
};

// ------------------------------------------------------------------ seeds

inline std::uint64_t scenario_seed(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(master_seed, index).next_u64();
}

inline std::uint64_t source_seed(std::uint64_t scenario_seed_value) { return Rng(scenario_seed_value, 1).next_u64(); }

// Every setting that affects generated data, and nothing else.
inline json generation_settings(const ExperimentConfig& c) {
  const ArrayGeometry geo = c.geometry();
  json mics = json::array();
  for (const Vec3& m : geo.mics()) mics.push_back({round6(m.x), round6(m.y), round6(m.z)});
  const FrameSpec fs = c.frames();
  return json{
      {"master_seed", c.master_seed},
      {"train_scenarios", c.train_scenarios},
      {"test_scenarios", c.test_scenarios},
      {"train_seed_start", c.train_seed_start},
      {"test_seed_start", c.test_seed_start},
      {"train_frame_stride", c.train_frame_stride},
      {"test_frame_stride", c.test_frame_stride},
      {"sample_rate", round6(c.sample_rate)},
      {"duration_s", round6(c.duration_s)},
      {"frame_length", fs.length},
      {"frame_hop", fs.hop},
      {"window", config_detail::window_name(c.window)},
      {"source", c.source == SourceKind::kWhiteNoise ? "white_noise" : "speech_like"},
      {"write_audio", c.write_audio},
      {"speed_of_sound", round6(c.speed_of_sound)},
      {"mics", mics},
      {"dims_min", {round6(c.room.dims_min.x), round6(c.room.dims_min.y), round6(c.room.dims_min.z)}},
      {"dims_max", {round6(c.room.dims_max.x), round6(c.room.dims_max.y), round6(c.room.dims_max.z)}},
      {"absorption", {round6(c.room.absorption_min), round6(c.room.absorption_max)}},
      {"wall_margin", round6(c.room.wall_margin_m)},
      {"distance_factors", {round6(c.room.distance_min_factor), round6(c.room.distance_max_factor)}},
      {"max_attempts", c.room.max_attempts},
      {"max_order", c.max_order},
      {"azimuth_resolution", round6(c.grid.azimuth_resolution_deg)},
      {"elevation_resolution", round6(c.grid.elevation_resolution_deg)},
      {"pool", {c.pool_azimuth, c.pool_elevation}},
      {"speaker_elevation", round6(c.speaker_elevation_deg)},
      {"phat_floor", c.phat_floor},
      {"map_height", c.map_height()},
      {"map_width", c.map_width()},
  };
}

// --------------------------------------------------------------- generate

struct GenerateSummary {
  std::filesystem::path manifest;
  std::string dataset_hash;
  std::size_t scenarios = 0;
  std::size_t frames = 0;
};

namespace pipeline_detail {

inline void log_line(std::ostream* log, const std::string& text) {
  if (log) (*log) << text << std::endl;
}

inline json scenario_json(const RoomScenario& s) {
  auto v3 = [](const Vec3& v) { return json{round6(v.x), round6(v.y), round6(v.z)}; };
  return json{{"room_dims", v3(s.room_dims)},
              {"absorption", round6(s.absorption)},
              {"source_pos", v3(s.source_pos)},
              {"array_center", v3(s.array_center)},
              {"t60", round6(s.t60)},
              {"critical_distance", round6(s.critical_distance)},
              {"source_distance", round6(s.source_distance())},
              {"true_azimuth_deg", round6(s.true_azimuth_deg)}};
}

inline GenerateSummary generate(const ExperimentConfig& c, std::ostream* log) {
  const Layout layout{c.output_dir};
  const ArrayGeometry geo = c.geometry();
  const FrameSpec fs = c.frames();
  const SteeringDelayTable table = build_delay_table(geo, c.grid, c.sample_rate);
  const SrpMapper mapper(table, fs.length, c.phat_floor);
  RenderOptions render;
  render.duration_s = c.duration_s;
  render.max_order = c.max_order;
  render.speed_of_sound = c.speed_of_sound;

  json scenarios = json::array();
  GenerateSummary summary;
  for (const char* split : {"train", "test"}) {
    const bool is_train = std::string_view(split) == "train";
    const std::size_t count = is_train ? c.train_scenarios : c.test_scenarios;
    const std::uint64_t start = is_train ? c.train_seed_start : c.test_seed_start;
    const std::size_t stride = is_train ? c.train_frame_stride : c.test_frame_stride;
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t seed = scenario_seed(c.master_seed, start + i);
      const RoomScenario sc = sample_scenario(seed, c.room, geo);
      const SignalBuffer src = synth_source(c.source, c.duration_s, source_seed(seed), c.sample_rate);
      const std::vector<SignalBuffer> channels = render_scene(sc, src, geo, render);

      char stem[64];
      std::snprintf(stem, sizeof stem, "%s_%04zu", split, i);
      json entry{{"split", split}, {"index", i}, {"seed_index", start + i}, {"scenario_seed", seed},
                 {"source_seed", source_seed(seed)}};
      entry["scenario"] = scenario_json(sc);
      if (c.write_audio) {
        const std::filesystem::path wav = layout.dataset() / "audio" / (std::string(stem) + ".wav");
        std::filesystem::create_directories(wav.parent_path());
        write_wav_float(wav, channels);
        entry["audio"] = "audio/" + std::string(stem) + ".wav";
        entry["audio_sha256"] = sha256_file(wav);
      }

      const std::size_t label_bin = azimuth_to_bin(wrap_degrees(sc.true_azimuth_deg));
      const std::vector<MultichannelFrame> frames = frame_channels(channels, c.frame_ms, c.overlap, c.window);
      std::ostringstream maps(std::ios::binary);
      json frame_rows = json::array();
      for (std::size_t k = 0; k < frames.size(); k += stride) {
        const DirectionalMap full = mapper.compute(frames[k]);
        const DirectionalMap full_norm = normalize_map(full);
        const SrpEstimate est = srp_argmax(full_norm);
        const double c_srp = srp_reliability(full_norm, c.speaker_elevation_deg);
        write_map(maps, normalize_map(downsample_map(full, c.pool_azimuth, c.pool_elevation)));
        frame_rows.push_back({{"frame_index", k},
                              {"label_bin", label_bin},
                              {"srp_azimuth_deg", round6(est.azimuth_deg)},
                              {"srp_elevation_deg", round6(est.elevation_deg)},
                              {"c_srp", round6(c_srp)}});
      }
      const std::string map_bytes = maps.str();
      write_file_atomic(layout.dataset() / "maps" / (std::string(stem) + ".srpm"), map_bytes);
      entry["maps"] = "maps/" + std::string(stem) + ".srpm";
      entry["maps_sha256"] = sha256_hex(map_bytes);
      entry["frames"] = std::move(frame_rows);
      summary.frames += entry["frames"].size();
      scenarios.push_back(std::move(entry));
      ++summary.scenarios;
      char msg[160];
      std::snprintf(msg, sizeof msg, "generate %s: t60 %.2f s, distance %.2f m, azimuth %.1f deg", stem, sc.t60,
                    sc.source_distance(), sc.true_azimuth_deg);
      log_line(log, msg);
    }
  }

  const json manifest{{"format", "srpnet-dataset"},
                      {"version", 1},
                      {"generation", generation_settings(c)},
                      {"scenarios", std::move(scenarios)}};
  const std::string text = manifest.dump(1) + "\n";
  write_file_atomic(layout.manifest(), text);
  summary.manifest = layout.manifest();
  summary.dataset_hash = sha256_hex(text);
  return summary;
}

}  // namespace pipeline_detail

inline GenerateSummary cmd_generate(const ExperimentConfig& config, std::ostream* log = nullptr) {
  config.validate();
  DirectoryLock lock(config.output_dir);
  return pipeline_detail::generate(config, log);
}

// ---------------------------------------------------------------- dataset

struct FrameEntry {
  std::uint64_t frame_id = 0;  // position within its split
  std::size_t scenario = 0;
  std::size_t frame_index = 0;
  std::size_t label_bin = 0;
  double true_azimuth_deg = 0.0;
  double srp_azimuth_deg = 0.0;
  double c_srp = 0.0;
  std::vector<float> map;
};

struct LoadedDataset {
  std::string hash;
  json manifest;
  std::size_t map_height = 0;
  std::size_t map_width = 0;
  std::vector<FrameEntry> train;
  std::vector<FrameEntry> test;
};

// Reads the manifest and the map files of the requested splits, checking
// content hashes and agreement with the current configuration.
inline LoadedDataset load_dataset(const ExperimentConfig& c, bool want_train, bool want_test) {
  const Layout layout{c.output_dir};
  if (!std::filesystem::exists(layout.manifest()))
    throw DataError("dataset manifest not found at " + layout.manifest().string() + "; run 'generate' first");
  LoadedDataset ds;
  const std::string text = read_file(layout.manifest());
  ds.hash = sha256_hex(text);
  try {
    ds.manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + layout.manifest().string() + ": " + e.what());
  }
  if (ds.manifest.value("format", "") != "srpnet-dataset")
    throw DataError(layout.manifest().string() + " is not an srpnet dataset manifest");
  if (ds.manifest.at("generation") != generation_settings(c))
    throw DataError("dataset at " + layout.dataset().string() +
                    " was generated with different settings than the current config; rerun 'generate'");
  ds.map_height = ds.manifest["generation"]["map_height"].get<std::size_t>();
  ds.map_width = ds.manifest["generation"]["map_width"].get<std::size_t>();

  for (const json& entry : ds.manifest.at("scenarios")) {
    const bool is_train = entry.at("split") == "train";
    if ((is_train && !want_train) || (!is_train && !want_test)) continue;
    std::vector<FrameEntry>& out = is_train ? ds.train : ds.test;
    const std::filesystem::path maps_path = layout.dataset() / entry.at("maps").get<std::string>();
    const std::string bytes = read_file(maps_path);
    if (sha256_hex(bytes) != entry.at("maps_sha256"))
      throw DataError("content hash mismatch for " + maps_path.string() + "; the dataset was modified");
    std::istringstream is(bytes, std::ios::binary);
    for (const json& fr : entry.at("frames")) {
      const std::optional<DirectionalMap> map = read_map(is);
      if (!map) throw DataError(maps_path.string() + " holds fewer maps than the manifest lists");
      if (map->n_elevation != ds.map_height || map->n_azimuth != ds.map_width)
        throw DataError(maps_path.string() + ": map size differs from the manifest");
      FrameEntry fe;
      fe.frame_id = out.size();
      fe.scenario = entry.at("index").get<std::size_t>();
      fe.frame_index = fr.at("frame_index").get<std::size_t>();
      fe.label_bin = fr.at("label_bin").get<std::size_t>();
      fe.true_azimuth_deg = entry.at("scenario").at("true_azimuth_deg").get<double>();
      fe.srp_azimuth_deg = fr.at("srp_azimuth_deg").get<double>();
      fe.c_srp = fr.at("c_srp").get<double>();
      fe.map.assign(map->power.begin(), map->power.end());
      out.push_back(std::move(fe));
    }
    if (read_map(is)) throw DataError(maps_path.string() + " holds more maps than the manifest lists");
  }
  return ds;
}

// ------------------------------------------------------------------ train

struct TrainSummary {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
  std::string dataset_hash;
  bool reused = false;
  std::vector<double> epoch_loss;
};

namespace pipeline_detail {

inline GaussianKernel kernel_for(const ExperimentConfig& c, double sigma) {
  return c.kernel_radius > 0 ? gaussian_kernel(sigma, c.kernel_radius) : gaussian_kernel(sigma);
}

inline ModelConfig model_config(const ExperimentConfig& c, const LoadedDataset& ds) {
  ModelConfig m = c.model;
  m.input_height = ds.map_height;
  m.input_width = ds.map_width;
  return m;
}

// Settings that determine a checkpoint besides the dataset.
inline json training_settings(const ExperimentConfig& c, double sigma) {
  return json{{"sigma", round6(sigma)},
              {"kernel_radius", c.kernel_radius},
              {"conv_channels", c.model.conv_channels},
              {"dense_widths", c.model.dense_widths},
              {"model_seed", c.model.seed},
              {"optimizer", c.train.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
              {"learning_rate", c.train.learning_rate},
              {"momentum", c.train.momentum},
              {"batch_size", c.train.batch_size},
              {"epochs", c.train.epochs},
              {"train_seed", c.train.seed}};
}

inline bool checkpoint_current(const Layout& layout, const ExperimentConfig& c, double sigma,
                               const std::string& hash) {
  const auto ckpt = layout.checkpoint(sigma, hash);
  const auto side = layout.sidecar(sigma, hash);
  if (!std::filesystem::exists(ckpt) || !std::filesystem::exists(side) ||
      !std::filesystem::exists(layout.loss_csv(sigma, hash)))
    return false;
  try {
    const json meta = json::parse(read_file(side));
    return meta.at("dataset_hash") == hash && meta.at("training") == training_settings(c, sigma) &&
           meta.at("checkpoint_sha256") == sha256_file(ckpt);
  } catch (const std::exception&) {
    return false;
  }
}

inline TrainSummary train_model(const ExperimentConfig& c, const LoadedDataset& ds, double sigma, bool reuse,
                                std::ostream* log) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive, got " + fmt6(sigma));
  const Layout layout{c.output_dir};
  TrainSummary summary;
  summary.dataset_hash = ds.hash;
  summary.checkpoint = layout.checkpoint(sigma, ds.hash);
  summary.loss_csv = layout.loss_csv(sigma, ds.hash);
  if (reuse && checkpoint_current(layout, c, sigma, ds.hash)) {
    summary.reused = true;
    log_line(log, "train sigma " + fmt6(sigma) + ": reusing " + summary.checkpoint.string());
    return summary;
  }
  if (ds.train.empty()) throw DataError("training split is empty");

  const GaussianKernel kernel = kernel_for(c, sigma);
  Dataset data;
  for (const FrameEntry& fe : ds.train) {
    data.inputs.push_back(fe.map);
    data.targets.push_back(smooth_label(fe.label_bin, kernel).probs);
    data.true_bins.push_back(fe.label_bin);
  }
  Classifier<float> model(model_config(c, ds));
  const TrainResult result = train(model, data, c.train, [&](std::size_t epoch, double loss) {
    log_line(log, "train sigma " + fmt6(sigma) + ": epoch " + std::to_string(epoch + 1) + "/" +
                      std::to_string(c.train.epochs) + " loss " + fmt6(loss));
  });
  summary.epoch_loss = result.epoch_loss;

  std::string csv = "epoch,loss,train_accuracy\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
    csv += std::to_string(e + 1) + "," + fmt6(result.epoch_loss[e]) + "," + fmt6(result.epoch_accuracy[e]) + "\n";
  const std::string bytes = serialize_checkpoint(model);
  write_file_atomic(summary.checkpoint, bytes);
  write_file_atomic(summary.loss_csv, csv);
  const json meta{{"dataset_hash", ds.hash},
                  {"training", training_settings(c, sigma)},
                  {"checkpoint_sha256", sha256_hex(bytes)}};
  write_file_atomic(layout.sidecar(sigma, ds.hash), meta.dump(1) + "\n");
  return summary;
}

}  // namespace pipeline_detail

inline TrainSummary cmd_train(const ExperimentConfig& config, double sigma, std::ostream* log = nullptr) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive, got " + fmt6(sigma));
  config.validate();
  DirectoryLock lock(config.output_dir);
  const LoadedDataset ds = load_dataset(config, true, false);
  return pipeline_detail::train_model(config, ds, sigma, false, log);
}

// ------------------------------------------------------------------- eval

struct MethodResult {
  Method method = Method::kDnn;
  double mae = 0.0;
  double accuracy = 0.0;
  std::vector<CurvePoint> curve;
};

struct EvalSummary {
  std::filesystem::path json_path;
  std::string dataset_hash;
  double sigma = 0.0;
  std::size_t frames = 0;
  MethodResult dnn;
  MethodResult srp;
  std::vector<EvalRecord> dnn_records;
  std::vector<EvalRecord> srp_records;
};

namespace pipeline_detail {

inline MethodResult summarize(Method method, const std::vector<EvalRecord>& records, const ExperimentConfig& c,
                              double sigma) {
  MethodResult r;
  r.method = method;
  r.mae = mae(records);
  r.accuracy = accuracy(records, c.accuracy_margin_deg);
  r.curve = accuracy_vs_top_curve(records, c.top_percents, c.accuracy_margin_deg, sigma);
  return r;
}

inline json curve_json(const std::vector<CurvePoint>& curve, std::size_t n) {
  json out = json::array();
  for (const CurvePoint& p : curve)
    out.push_back({{"top_percent", round6(p.top_percent)},
                   {"n_frames", top_count(n, p.top_percent)},
                   {"accuracy", round6(p.accuracy)},
                   {"mae", round6(p.mae)}});
  return out;
}

inline std::string curve_csv(const MethodResult& r, std::optional<double> sigma, std::size_t n) {
  std::string out = "method,sigma,top_percent,n_frames,accuracy,mae\n";
  for (const CurvePoint& p : r.curve)
    out += method_name(r.method) + "," + (sigma ? fmt6(*sigma) : std::string()) + "," + fmt6(p.top_percent) + "," +
           std::to_string(top_count(n, p.top_percent)) + "," + fmt6(p.accuracy) + "," + fmt6(p.mae) + "\n";
  return out;
}

inline json method_json(const MethodResult& r, std::size_t n) {
  return json{{"method", method_name(r.method)},
              {"mae", round6(r.mae)},
              {"accuracy", round6(r.accuracy)},
              {"curve", curve_json(r.curve, n)}};
}

inline EvalSummary evaluate(const ExperimentConfig& c, const LoadedDataset& ds, const Classifier<float>& model,
                            double sigma, const std::string& checkpoint_name) {
  if (model.config().input_height != ds.map_height || model.config().input_width != ds.map_width)
    throw DataError("checkpoint expects " + std::to_string(model.config().input_height) + "x" +
                    std::to_string(model.config().input_width) + " maps, dataset holds " +
                    std::to_string(ds.map_height) + "x" + std::to_string(ds.map_width));
  if (ds.test.empty()) throw DataError("test split is empty");
  EvalSummary s;
  s.dataset_hash = ds.hash;
  s.sigma = sigma;
  s.frames = ds.test.size();
  typename Classifier<float>::Workspace ws;
  for (const FrameEntry& fe : ds.test) {
    const Prediction p = prediction_from_softmax(model.forward(fe.map, ws));
    s.dnn_records.push_back({p.azimuth_deg, fe.true_azimuth_deg, p.reliability, Method::kDnn, fe.frame_id});
    s.srp_records.push_back({fe.srp_azimuth_deg, fe.true_azimuth_deg, fe.c_srp, Method::kSrp, fe.frame_id});
  }
  s.dnn = summarize(Method::kDnn, s.dnn_records, c, sigma);
  s.srp = summarize(Method::kSrp, s.srp_records, c, sigma);

  const Layout layout{c.output_dir};
  const json out{{"dataset_hash", ds.hash},
                 {"checkpoint", checkpoint_name},
                 {"sigma", round6(sigma)},
                 {"accuracy_margin_deg", round6(c.accuracy_margin_deg)},
                 {"n_frames", s.frames},
                 {"methods", {method_json(s.dnn, s.frames), method_json(s.srp, s.frames)}}};
  s.json_path = layout.eval_json(sigma, ds.hash);
  write_file_atomic(s.json_path, out.dump(1) + "\n");
  write_file_atomic(layout.dnn_curve(sigma, ds.hash), curve_csv(s.dnn, sigma, s.frames));
  write_file_atomic(layout.srp_curve(ds.hash), curve_csv(s.srp, std::nullopt, s.frames));
  return s;
}

}  // namespace pipeline_detail

// Evaluates a checkpoint (by default the one trained for config.sigma) and
// the SRP-PHAT baseline on the test split.
inline EvalSummary cmd_eval(const ExperimentConfig& config,
                            const std::optional<std::filesystem::path>& checkpoint = std::nullopt,
                            std::ostream* log = nullptr) {
  config.validate();
  DirectoryLock lock(config.output_dir);
  const LoadedDataset ds = load_dataset(config, false, true);
  const Layout layout{config.output_dir};
  const std::filesystem::path path = checkpoint ? *checkpoint : layout.checkpoint(config.sigma, ds.hash);
  if (!std::filesystem::exists(path))
    throw DataError("checkpoint not found at " + path.string() + "; run 'train' first");
  const Classifier<float> model = load_checkpoint(path);
  EvalSummary s = pipeline_detail::evaluate(config, ds, model, config.sigma, path.filename().string());
  pipeline_detail::log_line(log, "eval sigma " + fmt6(config.sigma) + ": dnn acc " + fmt6(s.dnn.accuracy) +
                                     " mae " + fmt6(s.dnn.mae) + ", srp_phat acc " + fmt6(s.srp.accuracy) +
                                     " mae " + fmt6(s.srp.mae));
  return s;
}

// ------------------------------------------------------------------ sweep

struct SweepRow {
  double sigma = 0.0;
  double full_mae = 0.0;
  double full_accuracy = 0.0;
  double top10_mae = 0.0;
  double top10_accuracy = 0.0;
};

struct SweepSummary {
  std::filesystem::path json_path;
  std::string dataset_hash;
  std::vector<SweepRow> rows;
  SweepRow srp;
  std::vector<EvalSummary> evals;
  std::size_t reused = 0;
};

namespace pipeline_detail {

inline SweepRow sweep_row(double sigma, const std::vector<EvalRecord>& records, double margin) {
  SweepRow r;
  r.sigma = sigma;
  r.full_mae = mae(records);
  r.full_accuracy = accuracy(records, margin);
  const std::vector<EvalRecord> top = reliability_filter(records, 10.0);
  r.top10_mae = mae(top);
  r.top10_accuracy = accuracy(top, margin);
  return r;
}

inline json row_json(const SweepRow& r) {
  return json{{"sigma", round6(r.sigma)},
              {"full_mae", round6(r.full_mae)},
              {"full_accuracy", round6(r.full_accuracy)},
              {"top10_mae", round6(r.top10_mae)},
              {"top10_accuracy", round6(r.top10_accuracy)}};
}

}  // namespace pipeline_detail

// Trains one model per sigma (reusing checkpoints whose sidecar hashes
// still match), evaluates each, and writes the summary table and curves.
inline SweepSummary cmd_sweep(const ExperimentConfig& config, std::ostream* log = nullptr) {
  config.validate();
  DirectoryLock lock(config.output_dir);
  const LoadedDataset ds = load_dataset(config, true, true);
  const Layout layout{config.output_dir};
  SweepSummary s;
  s.dataset_hash = ds.hash;
  std::string curves = "method,sigma,top_percent,n_frames,accuracy,mae\n";
  for (double sigma : config.sigmas) {
    const TrainSummary t = pipeline_detail::train_model(config, ds, sigma, true, log);
    s.reused += t.reused;
    const Classifier<float> model = load_checkpoint(t.checkpoint);
    EvalSummary e = pipeline_detail::evaluate(config, ds, model, sigma, t.checkpoint.filename().string());
    s.rows.push_back(pipeline_detail::sweep_row(sigma, e.dnn_records, config.accuracy_margin_deg));
    const std::string csv = pipeline_detail::curve_csv(e.dnn, sigma, e.frames);
    curves += csv.substr(csv.find('\n') + 1);
    pipeline_detail::log_line(log, "sweep sigma " + fmt6(sigma) + ": full acc " + fmt6(s.rows.back().full_accuracy) +
                                       ", top-10% acc " + fmt6(s.rows.back().top10_accuracy));
    s.evals.push_back(std::move(e));
  }
  s.srp = pipeline_detail::sweep_row(0.0, s.evals.front().srp_records, config.accuracy_margin_deg);
  const std::string srp_csv = pipeline_detail::curve_csv(s.evals.front().srp, std::nullopt, s.evals.front().frames);
  curves += srp_csv.substr(srp_csv.find('\n') + 1);

  json rows = json::array();
  for (const SweepRow& r : s.rows) rows.push_back(pipeline_detail::row_json(r));
  json srp = pipeline_detail::row_json(s.srp);
  srp.erase("sigma");
  const json out{{"dataset_hash", ds.hash},
                 {"accuracy_margin_deg", round6(config.accuracy_margin_deg)},
                 {"n_frames", s.evals.front().frames},
                 {"dnn", rows},
                 {"srp_phat", srp}};
  s.json_path = layout.sweep_json(ds.hash);
  write_file_atomic(s.json_path, out.dump(1) + "\n");
  write_file_atomic(layout.sweep_csv(ds.hash), curves);
  return s;
}

}  // namespace srpnet
