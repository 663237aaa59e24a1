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

#include "percep/evalkit/evalkit.hpp"

#include <fstream>

#include "percep/core/io.hpp"

namespace percep::evalkit {

nlohmann::ordered_json EvalThresholds::to_json() const {
  nlohmann::ordered_json j;
  j["rank_accuracy_min"] = rank_accuracy_min;
  j["pdm_auc_min"] = pdm_auc_min;
  j["anchor_drift_max"] = anchor_drift_max;
  j["reward_drift_max"] = reward_drift_max;
  j["hacking_rel_gap_min"] = hacking_rel_gap_min;
  j["hacking_score_eps"] = hacking_score_eps;
  return j;
}

EvalThresholds EvalThresholds::from_json(const nlohmann::json& j) {
  EvalThresholds t;
  t.rank_accuracy_min = j.value("rank_accuracy_min", t.rank_accuracy_min);
  t.pdm_auc_min = j.value("pdm_auc_min", t.pdm_auc_min);
  t.anchor_drift_max = j.value("anchor_drift_max", t.anchor_drift_max);
  t.reward_drift_max = j.value("reward_drift_max", t.reward_drift_max);
  t.hacking_rel_gap_min = j.value("hacking_rel_gap_min", t.hacking_rel_gap_min);
  t.hacking_score_eps = j.value("hacking_score_eps", t.hacking_score_eps);
  return t;
}

std::map<std::string, bool> EvalReport::verdicts(const EvalThresholds& t) const {
  std::map<std::string, bool> v;
  if (rank_accuracy) v["rank_accuracy"] = *rank_accuracy >= t.rank_accuracy_min;
  if (pdm_auc) v["pdm_auc"] = *pdm_auc >= t.pdm_auc_min;
  if (!anchor_drift_per_stage.empty()) {
    bool ok = true;
    for (double d : anchor_drift_per_stage) ok = ok && d <= t.anchor_drift_max;
    v["anchor_alignment"] = ok;
  }
  if (!transition_drifts.empty()) {
    bool ok = true;
    for (double d : transition_drifts) ok = ok && d <= t.reward_drift_max;
    v["reward_transition_drift"] = ok;
  }
  if (tiny_rank_base && tiny_rank_top) v["tiny_swap_sensitivity"] = *tiny_rank_top > *tiny_rank_base;
  if (hacking) {
    const double rel =
        (hacking->masked_error_rm0 - hacking->masked_error_rmN) /
        std::max(hacking->masked_error_rmN, 1e-12);
    v["hacking_masked_error_gap"] = rel >= t.hacking_rel_gap_min;
    v["hacking_base_score_blind"] =
        std::abs(hacking->rm0_score_arm0 - hacking->rm0_score_armN) <= t.hacking_score_eps;
  }
  return v;
}

bool EvalReport::all_pass(const EvalThresholds& t) const {
  for (const auto& [name, ok] : verdicts(t))
    if (!ok) return false;
  return true;
}

nlohmann::ordered_json EvalReport::to_json(const EvalThresholds& t) const {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["rank_accuracy"] = opt(rank_accuracy);
  j["pdm_auc"] = opt(pdm_auc);
  j["anchor_drift_per_stage"] = anchor_drift_per_stage;
  j["transition_drifts"] = transition_drifts;
  j["tiny_rank_base"] = opt(tiny_rank_base);
  j["tiny_rank_top"] = opt(tiny_rank_top);
  if (hacking) {
    nlohmann::ordered_json h;
    h["masked_error_rm0"] = hacking->masked_error_rm0;
    h["masked_error_rmN"] = hacking->masked_error_rmN;
    h["rm0_score_arm0"] = hacking->rm0_score_arm0;
    h["rm0_score_armN"] = hacking->rm0_score_armN;
    j["hacking"] = std::move(h);
  } else {
    j["hacking"] = nullptr;
    j["hacking_skipped"] = "needs both base and top reward model checkpoints";
  }
  auto& cj = j["curves"] = nlohmann::ordered_json::object();
  for (const auto& [name, st] : curves) {
    cj[name] = {{"early_std", st.early_std}, {"final_reward", st.final_reward}};
  }
  auto& ej = j["extra"] = nlohmann::ordered_json::object();
  for (const auto& [k, val] : extra) ej[k] = val;
  j["thresholds"] = t.to_json();
  auto& vj = j["verdicts"] = nlohmann::ordered_json::object();
  for (const auto& [k, ok] : verdicts(t)) vj[k] = ok;
  j["all_pass"] = all_pass(t);
  return j;
}

std::vector<std::filesystem::path> emit_report(const ReportInputs& in,
                                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "plots");
  std::vector<std::filesystem::path> written;

  nlohmann::ordered_json summary = in.report.to_json(in.thresholds);
  if (in.reward_curves.empty()) summary["runs"] = "no runs";
  const auto summary_path = out_dir / "summary.json";
  {
    std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
    out << summary.dump(2) << "\n";
  }
  written.push_back(summary_path);

  if (!in.reward_curves.empty()) {
    const auto p = out_dir / "plots" / "reward_curves.png";
    core::write_image_png8(p, line_chart(in.reward_curves));
    written.push_back(p);
  }
  if (!in.score_sets.empty()) {
    const auto p = out_dir / "plots" / "score_hist.png";
    core::write_image_png8(p, histogram(in.score_sets));
    written.push_back(p);
  }
  for (const auto& ov : in.overlays) {
    const auto p = out_dir / "plots" / ("overlay_" + ov.name + ".png");
    core::write_image_png8(p, overlay_map(ov.syn, ov.map));
    written.push_back(p);
  }
  return written;
}

}  // namespace percep::evalkit
