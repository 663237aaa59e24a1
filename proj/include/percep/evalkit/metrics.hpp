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
#include <optional>
#include <vector>

#include "percep/fgrstore/fgrstore.hpp"
#include "percep/refl/refl.hpp"
#include "percep/rm/rm.hpp"

namespace percep::evalkit {

/// Fraction of triplets with the strict ordering s_gt > s_syn > s_sr.
/// Ties fail the ordering. Scores are (s_sr, s_syn, s_gt) per triplet.
double rank_accuracy_of_scores(const std::vector<std::array<double, 3>>& scores);

/// Score every triplet of the view under the model and rank it.
double rank_accuracy(const rm::RewardModel& model, const fgrstore::DatasetView& view);
double rank_accuracy(const rm::RewardModel& model,
                     const std::vector<fgrstore::SampleTriplet>& triplets);

/// Mann-Whitney AUC of the prediction against the binary mask, ties handled
/// by midrank. Rejects single-class masks.
double pdm_auc(const core::Tensor& pred, const core::Mask& mask);

/// Mean AUC of the model's predicted maps against the stored swap masks.
double mean_pdm_auc(const rm::RewardModel& model, const fgrstore::DatasetView& view);
double mean_pdm_auc(const rm::RewardModel& model,
                    const std::vector<fgrstore::SampleTriplet>& triplets);

/// Mean |score(gt) - base_score(gt)| over the view.
double anchor_drift(const rm::RewardModel& model, const rm::RewardModel& base,
                    const fgrstore::DatasetView& view);

/// Centered moving average, window clamped at the edges.
std::vector<double> smooth(const std::vector<double>& xs, int window);

struct CurveStats {
  double early_std = 0.0;    // std of the smoothed curve over the early phase
  double final_reward = 0.0; // last smoothed value
};
CurveStats curve_stats(const std::vector<double>& rewards, int window, double early_frac);

/// Triplets whose swap region is tiny (the fine-grained sensitivity set):
/// stored gt/sr pairs recomposed under fresh low-coverage rect masks.
std::vector<fgrstore::SampleTriplet> make_tiny_swap_triplets(
    const fgrstore::DatasetView& view, std::pair<double, double> coverage, std::uint64_t seed,
    const gtpdm::FeatureExtractor& extractor, double alpha);

/// Structure-only distortions: inside each (semantic) mask the clean content
/// is block-transposed, a spatial permutation that preserves the pixel
/// histogram exactly but breaks local structure. Labels for localization are
/// the masks themselves.
struct StructureProbe {
  core::Image syn;
  core::Mask mask;
};
std::vector<StructureProbe> make_structure_probes(const fgrstore::DatasetView& view,
                                                  const std::vector<core::Mask>& semantic_masks,
                                                  std::uint64_t seed, int block);

double mean_pdm_auc_on_probes(const rm::RewardModel& model,
                              const std::vector<StructureProbe>& probes);

/// Two generators trained identically except for the reward source, then
/// compared on pixel error inside high-degradation regions and on the base
/// scorer's view of their outputs.
struct HackingGap {
  double masked_error_rm0 = 0.0;
  double masked_error_rmN = 0.0;
  double rm0_score_arm0 = 0.0;
  double rm0_score_armN = 0.0;
};

struct HackingProbeInputs {
  refl::GeneratorConfig gen_template;
  refl::PairedBatchSet train;            // shared training pairs
  refl::PairedBatchSet probe;            // held-out probe pairs
  std::vector<core::Tensor> probe_mgt;   // per probe sample, [H,W]
  double mgt_quantile = 0.8;             // high-degradation threshold
};

HackingGap hacking_probe(const HackingProbeInputs& in, const rm::RewardModel& rm0,
                         const rm::RewardModel& rmN, const refl::ReflConfig& cfg);

}  // namespace percep::evalkit
