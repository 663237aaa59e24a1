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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percep/ccl/ccl.hpp"
#include "percep/core/image.hpp"
#include "percep/nn/adam.hpp"
#include "percep/refl/generator.hpp"
#include "percep/rm/rm.hpp"

namespace percep::refl {

// Reward-feedback fine-tuning: the reward gradient is backpropagated through
// the frozen reward model into the generator, with a reconstruction anchor.

enum class RewardMode { score_only, decoupled };

RewardMode reward_mode_from(const std::string& s);
const char* reward_mode_name(RewardMode m);

struct ReflConfig {
  RewardMode reward_mode = RewardMode::score_only;
  double lambda1 = 1.0;  // decoupled: weight of the plain encoder score
  double lambda2 = 1.0;  // decoupled: weight of (1 - max(map))
  double fidelity_weight = 1.0;
  int steps = 1000;
  double lr = 5e-4;
  int batch_size = 4;
  std::uint64_t seed = 7;

  nlohmann::ordered_json to_json() const;
  static ReflConfig from_json(const nlohmann::json& j);
  void validate() const;
};

/// Differentiable reward of an image under the given model.
/// score_only: the modulated global score. decoupled: lambda1 * plain encoder
/// score + lambda2 * (1 - max(map)); requires stage >= 1.
nn::Var reward_var(const nn::Var& img, const rm::RewardModel& model, RewardMode mode,
                   double lambda1, double lambda2);

/// Fixed (lr, gt) pairs the generator trains on.
struct PairedBatchSet {
  std::vector<core::Tensor> lr;
  std::vector<core::Tensor> gt;
  size_t size() const { return lr.size(); }
};

struct StepLog {
  int step = 0;
  int stage = 0;
  double mean_reward = 0.0;
  double fidelity = 0.0;
};

/// One update of the generator against the frozen reward model: ascend
/// mean(reward) - fidelity_weight * mean((sr - gt)^2). The reward model's
/// parameters are never touched.
StepLog refl_step(ToyGenerator& gen, const PairedBatchSet& data,
                  const std::vector<size_t>& batch_idx, const rm::RewardModel& model,
                  const ReflConfig& cfg, nn::Adam& opt);

struct TransitionLog {
  int step = 0;
  int from_stage = 0;
  int to_stage = 0;
  double probe_reward_old = 0.0;
  double probe_reward_new = 0.0;
  double drift = 0.0;
};

struct CurriculumRunLog {
  std::vector<StepLog> steps;
  std::vector<TransitionLog> transitions;
  std::vector<double> rewards() const;
};

/// Run the generator through the staged schedule, switching the reward source
/// at every segment boundary and logging a probe-batch drift check there.
/// Writes one JSON line per step/transition to `log` when given.
CurriculumRunLog run_curriculum(ToyGenerator& gen, const PairedBatchSet& train,
                                const PairedBatchSet& probe, ccl::CurriculumState state,
                                ccl::RewardSourceCache& sources, const ReflConfig& cfg,
                                std::ostream* log = nullptr);

}  // namespace percep::refl
