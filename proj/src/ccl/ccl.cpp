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

#include "percep/ccl/ccl.hpp"

#include <stdexcept>

namespace percep::ccl {

Mode mode_from(const std::string& s) {
  if (s == "param") return Mode::param;
  if (s == "weight") return Mode::weight;
  if (s == "direct") return Mode::direct;
  throw std::invalid_argument("unknown curriculum mode: " + s);
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::param: return "param";
    case Mode::weight: return "weight";
    case Mode::direct: return "direct";
  }
  return "?";
}

void CclConfig::validate(int ladder_top_stage) const {
  if (stage_budgets.empty()) throw std::invalid_argument("ccl: empty stage budgets");
  for (int b : stage_budgets)
    if (b < 1) throw std::invalid_argument("ccl: stage budgets must be positive");
  if (rm_refine_steps < 0) throw std::invalid_argument("ccl: negative rm_refine_steps");
  if (drift_bound <= 0) throw std::invalid_argument("ccl: drift bound must be positive");
  if (mode != Mode::direct &&
      static_cast<int>(stage_budgets.size()) != ladder_top_stage + 1)
    throw std::invalid_argument("ccl: need one budget per ladder stage (" +
                                std::to_string(ladder_top_stage + 1) + ")");
  if (mode == Mode::weight) {
    if (static_cast<int>(weight_ramp.size()) != ladder_top_stage)
      throw std::invalid_argument("ccl: weight ramp needs one entry per stage >= 1");
    for (size_t i = 1; i < weight_ramp.size(); ++i)
      if (weight_ramp[i][0] < weight_ramp[i - 1][0] || weight_ramp[i][1] < weight_ramp[i - 1][1])
        throw std::invalid_argument("ccl: weight ramp must be nondecreasing");
  }
}

nlohmann::ordered_json CclConfig::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = mode_name(mode);
  j["stage_budgets"] = stage_budgets;
  j["rm_refine_steps"] = rm_refine_steps;
  j["drift_bound"] = drift_bound;
  auto& ramp = j["weight_ramp"] = nlohmann::ordered_json::array();
  for (const auto& w : weight_ramp) ramp.push_back({w[0], w[1]});
  return j;
}

CclConfig CclConfig::from_json(const nlohmann::json& j) {
  CclConfig c;
  if (j.contains("mode")) c.mode = mode_from(j["mode"].get<std::string>());
  if (j.contains("stage_budgets")) c.stage_budgets = j["stage_budgets"].get<std::vector<int>>();
  c.rm_refine_steps = j.value("rm_refine_steps", c.rm_refine_steps);
  c.drift_bound = j.value("drift_bound", c.drift_bound);
  if (j.contains("weight_ramp")) {
    c.weight_ramp.clear();
    for (const auto& e : j["weight_ramp"])
      c.weight_ramp.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return c;
}

std::filesystem::path stage_checkpoint_path(const std::filesystem::path& dir, Mode mode,
                                            int stage) {
  const char* prefix = mode == Mode::weight ? "rm_weight_stage" : "rm_stage";
  return dir / (std::string(prefix) + std::to_string(stage) + ".ckpt");
}

std::vector<Segment> plan_segments(const CclConfig& cfg, int ladder_top_stage,
                                   const std::filesystem::path& rm_checkpoint_dir) {
  cfg.validate(ladder_top_stage);
  std::vector<Segment> segments;
  if (cfg.mode == Mode::direct) {
    int total = 0;
    for (int b : cfg.stage_budgets) total += b;
    segments.push_back({ladder_top_stage, total,
                        stage_checkpoint_path(rm_checkpoint_dir, Mode::param, ladder_top_stage)});
    return segments;
  }
  for (int s = 0; s <= ladder_top_stage; ++s) {
    // Stage 0 always scores with the frozen base model, in both param and
    // weight modes; later weight-mode stages use the full-size model trained
    // under the ramped loss weights.
    const Mode name_mode = (s == 0) ? Mode::param : cfg.mode;
    segments.push_back({s, cfg.stage_budgets[static_cast<size_t>(s)],
                        stage_checkpoint_path(rm_checkpoint_dir, name_mode, s)});
  }
  return segments;
}

CurriculumState make_state(const CclConfig& cfg, std::vector<Segment> segments) {
  if (segments.empty()) throw std::invalid_argument("curriculum: no segments");
  CurriculumState s;
  s.mode = cfg.mode;
  s.segments = std::move(segments);
  return s;
}

CurriculumState advance(CurriculumState s) {
  const int budget = s.segments.at(static_cast<size_t>(s.segment)).budget;
  ++s.step_in_stage;
  if (s.step_in_stage >= budget) {
    if (!s.terminal()) {
      ++s.segment;
      s.step_in_stage = 0;
    } else {
      s.step_in_stage = budget - 1;  // terminal stage absorbs further steps
    }
  }
  return s;
}

const rm::RewardModel& RewardSourceCache::get(const Segment& seg) {
  const std::string key = seg.rm_checkpoint.string();
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    if (!std::filesystem::exists(seg.rm_checkpoint))
      throw std::runtime_error("missing reward model checkpoint: " + key);
    auto model = std::make_unique<rm::RewardModel>(rm::RewardModel::load(seg.rm_checkpoint));
    model->freeze_all();
    it = cache_.emplace(key, std::move(model)).first;
  }
  return *it->second;
}

void RewardSourceCache::check_monotone_capacity(const std::vector<Segment>& segments) {
  std::int64_t prev = -1;
  for (const auto& seg : segments) {
    const auto count = get(seg).parameter_count();
    if (count <= prev)
      throw std::runtime_error("curriculum: reward model capacity not strictly increasing");
    prev = count;
  }
}

}  // namespace percep::ccl
