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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percep/evalkit/metrics.hpp"
#include "percep/evalkit/plot.hpp"

namespace percep::evalkit {

/// Thresholds the evaluation verdicts are judged against.
struct EvalThresholds {
  double rank_accuracy_min = 0.90;
  double pdm_auc_min = 0.85;
  double anchor_drift_max = 0.05;
  double reward_drift_max = 0.1;
  double hacking_rel_gap_min = 0.10;
  double hacking_score_eps = 0.05;

  nlohmann::ordered_json to_json() const;
  static EvalThresholds from_json(const nlohmann::json& j);
};

struct EvalReport {
  std::optional<double> rank_accuracy;
  std::optional<double> pdm_auc;
  std::vector<double> anchor_drift_per_stage;  // stages 1..N
  std::vector<double> transition_drifts;       // from curriculum logs
  std::optional<double> tiny_rank_base;
  std::optional<double> tiny_rank_top;
  std::optional<HackingGap> hacking;
  std::vector<std::pair<std::string, CurveStats>> curves;
  std::map<std::string, double> extra;

  /// Verdicts against the thresholds; criteria without data are omitted.
  std::map<std::string, bool> verdicts(const EvalThresholds& t) const;
  bool all_pass(const EvalThresholds& t) const;
  nlohmann::ordered_json to_json(const EvalThresholds& t) const;
};

struct OverlaySample {
  std::string name;
  core::Image syn;
  core::Tensor map;
};

struct ReportInputs {
  EvalReport report;
  EvalThresholds thresholds;
  std::vector<Series> reward_curves;  // per run, raw per-step rewards
  std::vector<Series> score_sets;     // score distributions for the histogram
  std::vector<OverlaySample> overlays;
};

/// Write summary.json and the plot files under out_dir; returns the paths
/// written. With no curves/overlays the summary carries explicit "no runs"
/// markers and no plot files are produced.
std::vector<std::filesystem::path> emit_report(const ReportInputs& in,
                                               const std::filesystem::path& out_dir);

}  // namespace percep::evalkit
