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
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "percep/fgrstore/fgrstore.hpp"
#include "percep/nn/graph.hpp"
#include "percep/rm/rm.hpp"

namespace percep::losses {

// Reward-model objectives: a dense L1 map loss, a two-sided margin ranking
// loss over (sr, syn, gt) scores, and an anchor term tying the clean-image
// score to the frozen base scorer. Batch means throughout.

struct LossWeights {
  double lambda_map = 1.0;
  double lambda_rank = 1.0;
  double lambda_align = 0.1;
  double m1 = 0.05;  // syn above sr by at least m1
  double m2 = 0.05;  // gt above syn by at least m2

  void validate() const;
};

struct LossReport {
  double l_map = 0.0;
  double l_rank = 0.0;
  double l_align = 0.0;
  double l_total = 0.0;
  double g_total = 0.0;                       // gradient norm of the weighted total
  std::optional<double> g_map, g_rank, g_align;  // per-term norms when computed
};

/// Mean absolute difference between predicted and target maps.
double l_map_value(const core::Tensor& pred, const core::Tensor& target);

/// max(0, m1 - (s_syn - s_sr)) + max(0, m2 - (s_gt - s_syn)).
double l_rank_value(double s_sr, double s_syn, double s_gt, double m1, double m2);

/// |s_current - s_base|.
double l_align_value(double s_gt_current, double s_gt_base);

struct TrainRmOptions {
  int steps = 600;
  int batch_size = 6;
  double lr = 1e-3;
  std::uint64_t seed = 11;
  int grad_log_every = 50;  // full per-term gradient norms every N steps
};

/// Scores on clean images from the frozen stage-0 model, cached per sample.
class BaseScoreCache {
 public:
  explicit BaseScoreCache(const rm::RewardModel& base) : base_(&base) {}
  double score(const fgrstore::DatasetView& view, size_t idx, const core::Image& gt);

 private:
  const rm::RewardModel* base_;
  std::map<std::string, double> cache_;
};

/// Build the batch loss graph; returns the total and fills the report values.
struct BatchGraph {
  nn::Var total;
  nn::Var map_term, rank_term, align_term;
};
BatchGraph batch_loss(const rm::RewardModel& model,
                      const std::vector<fgrstore::SampleTriplet>& batch,
                      const std::vector<double>& base_scores, const LossWeights& w);

/// Train the model in place on the train view. Writes one JSON line per step
/// to `log` when given. Aborts with the offending sample ids on a non-finite
/// loss. Requires stage >= 1 (stage 0 is the frozen base and is not trained).
std::vector<LossReport> train_rm(rm::RewardModel& model, const rm::RewardModel& base,
                                 const fgrstore::DatasetView& train, const LossWeights& weights,
                                 const TrainRmOptions& opt, std::ostream* log = nullptr);

}  // namespace percep::losses
