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

// srpnet: generate / train / eval / sweep.
//
// Exit codes: 0 ok, 1 internal error, 2 config error, 3 data error,
// 4 training divergence.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "srpnet/config.hpp"
#include "srpnet/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kDivergence = 4 };

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> sigma;
  std::optional<std::string> top_percents;
  std::optional<std::string> checkpoint;
  bool quiet = false;
};

srpnet::ExperimentConfig resolve(const Options& o) {
  srpnet::ExperimentConfig c = o.config_path.empty() ? srpnet::ExperimentConfig{} : srpnet::load_config(o.config_path);
  if (o.seed) c.master_seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.sigma) c.sigma = *o.sigma;
  if (o.top_percents) c.top_percents = srpnet::config_detail::parse_list(*o.top_percents, "--top-percents");
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SRP-PHAT maps and a CNN azimuth classifier with reliability ranking"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "experiment INI file (defaults apply when omitted)")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed (overrides [experiment] master_seed)");
  app.add_option("--out", o.out, "output directory (overrides [experiment] output_dir)");
  app.add_flag("-q,--quiet", o.quiet, "no progress output");

  auto* gen = app.add_subcommand("generate", "render scenarios and write maps, labels and manifest");
  auto* tr = app.add_subcommand("train", "train one model");
  tr->add_option("--sigma", o.sigma, "label smoothing sigma (default [eval] sigma)");
  auto* ev = app.add_subcommand("eval", "evaluate the model and SRP-PHAT on the test split");
  ev->add_option("--sigma", o.sigma, "selects the checkpoint trained with this sigma");
  ev->add_option("--checkpoint", o.checkpoint, "explicit checkpoint path");
  ev->add_option("--top-percents", o.top_percents, "comma-separated list, e.g. 5,10,50,100");
  auto* sw = app.add_subcommand("sweep", "train and evaluate every sigma in [labels] sigmas");
  sw->add_option("--top-percents", o.top_percents, "comma-separated list");
  app.add_subcommand("print-config", "print the resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  std::ostream* log = o.quiet ? nullptr : &std::cerr;
  try {
    const srpnet::ExperimentConfig c = resolve(o);
    if (gen->parsed()) {
      const auto s = srpnet::cmd_generate(c, log);
      std::cout << "manifest " << s.manifest.string() << "\n"
                << "scenarios " << s.scenarios << "\nframes " << s.frames << "\n"
                << "dataset_hash " << s.dataset_hash << "\n";
    } else if (tr->parsed()) {
      const auto s = srpnet::cmd_train(c, c.sigma, log);
      std::cout << "checkpoint " << s.checkpoint.string() << "\nloss_csv " << s.loss_csv.string() << "\n";
    } else if (ev->parsed()) {
      std::optional<std::filesystem::path> ckpt;
      if (o.checkpoint) ckpt = *o.checkpoint;
      const auto s = srpnet::cmd_eval(c, ckpt, log);
      std::cout << "results " << s.json_path.string() << "\n"
                << "dnn accuracy " << srpnet::fmt6(s.dnn.accuracy) << " mae " << srpnet::fmt6(s.dnn.mae) << "\n"
                << "srp_phat accuracy " << srpnet::fmt6(s.srp.accuracy) << " mae " << srpnet::fmt6(s.srp.mae)
                << "\n";
    } else if (sw->parsed()) {
      const auto s = srpnet::cmd_sweep(c, log);
      std::cout << "summary " << s.json_path.string() << "\n"
                << "sigma,full_mae,full_accuracy,top10_mae,top10_accuracy\n";
      for (const auto& r : s.rows)
        std::cout << srpnet::fmt6(r.sigma) << "," << srpnet::fmt6(r.full_mae) << "," << srpnet::fmt6(r.full_accuracy)
                  << "," << srpnet::fmt6(r.top10_mae) << "," << srpnet::fmt6(r.top10_accuracy) << "\n";
      std::cout << "srp_phat," << srpnet::fmt6(s.srp.full_mae) << "," << srpnet::fmt6(s.srp.full_accuracy) << ","
                << srpnet::fmt6(s.srp.top10_mae) << "," << srpnet::fmt6(s.srp.top10_accuracy) << "\n";
    } else {
      std::cout << srpnet::config_to_ini(c);
    }
  } catch (const srpnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const srpnet::DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const srpnet::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
