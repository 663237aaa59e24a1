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

#include <iosfwd>
#include <string>

#include "percep/cli/config.hpp"

namespace percep::cli {

// Command bodies return process exit codes: 0 success, 1 failure,
// 3 = eval ran but a configured threshold did not pass.

/// Write a procedural demo corpus: GT images into paths.gt_dir and blob
/// masks into paths.semantic_mask_dir.
int cmd_gen_data(const RunConfig& cfg, int n_images, int n_masks, int size, std::ostream& out);

/// Build the dataset; prints split sizes and the manifest hash.
int cmd_synth(const RunConfig& cfg, std::ostream& out);

/// Train the reward-model ladder. stage_sel: "0".."N" or "all". Stage 0
/// emits the frozen seeded base without gradient steps; stage k expands the
/// previous checkpoint, verifies the carry-over, then trains. With
/// ccl.mode=weight the full-size model is additionally trained under the
/// ramped loss weights, one checkpoint per ramp stage.
int cmd_train_rm(const RunConfig& cfg, const std::string& stage_sel, std::ostream& out);

/// Run the generator curriculum against the staged checkpoints.
int cmd_train_gen(const RunConfig& cfg, std::ostream& out);

/// Held-out metrics, the reward-hacking probe when both end checkpoints
/// exist, report + plots. Exit 0 only if the configured thresholds pass.
int cmd_eval(const RunConfig& cfg, std::ostream& out);

/// Re-render report plots from existing logs without recomputing metrics.
int cmd_report(const RunConfig& cfg, std::ostream& out);

}  // namespace percep::cli
