// Copyright 2026 The percep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <iostream>

#include "percep/cli/commands.hpp"
#include "percep/cli/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"percep: fine-grained perceptual reward modeling for image restoration"};
  app.require_subcommand(1);

  std::optional<std::filesystem::path> config_file;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_file, "config file (JSON)");
  app.add_option("--set", overrides, "override a config key: dotted.path=value")
      ->take_all()
      ->allow_extra_args(false);

  auto* synth = app.add_subcommand("synth", "build the distortion dataset");
  auto* train_rm = app.add_subcommand("train-rm", "train the reward model ladder");
  std::string stage_sel = "all";
  train_rm->add_option("--stage", stage_sel, "stage index or 'all'")->capture_default_str();
  auto* train_gen = app.add_subcommand("train-gen", "train the generator under the curriculum");
  auto* eval = app.add_subcommand("eval", "held-out metrics, probes and report");
  auto* report = app.add_subcommand("report", "re-render plots from existing logs");
  auto* gen_data = app.add_subcommand("gen-data", "write a procedural demo corpus");
  int n_images = 24, n_masks = 12, img_size = 96;
  gen_data->add_option("--images", n_images, "number of GT images")->capture_default_str();
  gen_data->add_option("--masks", n_masks, "number of semantic masks")->capture_default_str();
  gen_data->add_option("--size", img_size, "image size in pixels")->capture_default_str();
  auto* dump = app.add_subcommand("dump-config", "print the resolved config and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    const percep::cli::RunConfig cfg = percep::cli::load_config(config_file, overrides);
    if (synth->parsed()) return percep::cli::cmd_synth(cfg, std::cout);
    if (train_rm->parsed()) return percep::cli::cmd_train_rm(cfg, stage_sel, std::cout);
    if (train_gen->parsed()) return percep::cli::cmd_train_gen(cfg, std::cout);
    if (eval->parsed()) return percep::cli::cmd_eval(cfg, std::cout);
    if (report->parsed()) return percep::cli::cmd_report(cfg, std::cout);
    if (gen_data->parsed())
      return percep::cli::cmd_gen_data(cfg, n_images, n_masks, img_size, std::cout);
    if (dump->parsed()) {
      std::cout << cfg.to_json().dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
