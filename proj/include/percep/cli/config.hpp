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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percep/ccl/ccl.hpp"
#include "percep/evalkit/evalkit.hpp"
#include "percep/fgrstore/fgrstore.hpp"
#include "percep/losses/losses.hpp"
#include "percep/refl/refl.hpp"
#include "percep/rm/rm.hpp"

namespace percep::cli {

namespace fs = std::filesystem;

// One configuration file drives every command; command-line overrides address
// keys by dotted path (e.g. ccl.mode=weight). Unknown keys are rejected, and
// every run directory receives a frozen snapshot of the resolved config.

struct ExtractorConfig {
  std::string kind = "randproj";  // "randproj" | "file"
  std::uint64_t seed = 9001;
  int dim = 48;
  fs::path path;  // for kind=file

  std::unique_ptr<gtpdm::FeatureExtractor> make() const;
};

struct EvalConfig {
  evalkit::EvalThresholds thresholds;
  double high_mgt_quantile = 0.8;
  int smooth_window = 25;
  double early_frac = 0.2;
  std::pair<double, double> tiny_coverage{0.003, 0.02};
  int structure_block = 8;
  int probe_samples = 12;
  int probe_steps = 400;
  int overlay_samples = 2;
};

struct RunConfig {
  std::uint64_t global_seed = 42;
  struct Paths {
    fs::path gt_dir = "data/gt";
    fs::path semantic_mask_dir = "data/masks";
    std::vector<fs::path> sr_dirs;
    fs::path out_dir = "runs";
  } paths;
  fgrstore::BuildConfig build;  // synth + degrade sections
  double alpha = 0.5;
  ExtractorConfig extractor;
  rm::LadderConfig rm;
  losses::LossWeights loss_weights;
  losses::TrainRmOptions rm_train;
  ccl::CclConfig ccl;
  refl::GeneratorConfig generator;
  refl::ReflConfig refl;
  EvalConfig eval;

  /// Canonical resolved form (what snapshots contain).
  nlohmann::ordered_json to_json() const;

  /// Hash over the canonical form minus paths.out_dir, so replays into a
  /// different output root keep their identity.
  std::string config_hash() const;

  fs::path dataset_dir() const;
  fs::path rm_dir() const;
  fs::path gen_dir() const;
  fs::path eval_dir() const;

  void write_snapshot(const fs::path& run_dir) const;
};

/// Defaults -> optional file -> dotted overrides; unknown keys anywhere are
/// an error. Values in overrides are parsed as JSON when possible, else kept
/// as strings ("ccl.mode=weight" works unquoted).
RunConfig load_config(const std::optional<fs::path>& file,
                      const std::vector<std::string>& overrides);

nlohmann::ordered_json default_config_json();

}  // namespace percep::cli
