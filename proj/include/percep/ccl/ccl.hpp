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

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percep/rm/rm.hpp"

namespace percep::ccl {

// Curriculum scheduler: walks the reward-model ladder stage by stage and
// switches the generator's reward source in lockstep. Training is
// block-sequential: each reward-model rung is trained to completion (the
// train-rm path) before the generator consumes it.

enum class Mode { param, weight, direct };

Mode mode_from(const std::string& s);
const char* mode_name(Mode m);

struct CclConfig {
  Mode mode = Mode::param;
  std::vector<int> stage_budgets{250, 250, 500};  // generator steps per stage
  int rm_refine_steps = 600;                      // per-stage reward model training
  double drift_bound = 0.1;
  // mode=weight: (lambda_map, lambda_rank) per stage k >= 1, nondecreasing.
  std::vector<std::array<double, 2>> weight_ramp{{0.2, 0.2}, {1.0, 1.0}};

  void validate(int ladder_top_stage) const;
  nlohmann::ordered_json to_json() const;
  static CclConfig from_json(const nlohmann::json& j);
};

/// One contiguous block of generator steps under a fixed reward source.
struct Segment {
  int stage = 0;  // ladder stage whose reward drives this block
  int budget = 0;
  std::filesystem::path rm_checkpoint;
};

/// Expand the config into the executed schedule. param/weight: one segment
/// per ladder stage; direct: a single segment at the top stage (the
/// no-curriculum baseline).
std::vector<Segment> plan_segments(const CclConfig& cfg, int ladder_top_stage,
                                   const std::filesystem::path& rm_checkpoint_dir);

struct CurriculumState {
  int segment = 0;
  int step_in_stage = 0;
  Mode mode = Mode::param;
  std::vector<Segment> segments;

  int k() const { return segments.at(static_cast<size_t>(segment)).stage; }
  bool terminal() const { return segment + 1 == static_cast<int>(segments.size()); }
};

CurriculumState make_state(const CclConfig& cfg, std::vector<Segment> segments);

/// Bump the step counter; cross into the next segment when the budget is
/// spent. The final stage absorbs further steps (the counter saturates).
CurriculumState advance(CurriculumState s);

/// Lazily loaded, frozen reward models per segment checkpoint.
class RewardSourceCache {
 public:
  /// Loads (once) and returns the frozen reward model for the segment.
  /// Throws when the checkpoint is missing.
  const rm::RewardModel& get(const Segment& seg);

  /// mode=param sanity: parameter counts strictly increase along segments.
  void check_monotone_capacity(const std::vector<Segment>& segments);

 private:
  std::map<std::string, std::unique_ptr<rm::RewardModel>> cache_;
};

/// Checkpoint naming shared by the trainer and the scheduler.
std::filesystem::path stage_checkpoint_path(const std::filesystem::path& dir, Mode mode, int stage);

}  // namespace percep::ccl
