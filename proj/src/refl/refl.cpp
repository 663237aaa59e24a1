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

#include "percep/refl/refl.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace percep::refl {

using nn::Var;

RewardMode reward_mode_from(const std::string& s) {
  if (s == "score_only") return RewardMode::score_only;
  if (s == "decoupled") return RewardMode::decoupled;
  throw std::invalid_argument("unknown reward mode: " + s);
}

const char* reward_mode_name(RewardMode m) {
  return m == RewardMode::score_only ? "score_only" : "decoupled";
}

nlohmann::ordered_json ReflConfig::to_json() const {
  nlohmann::ordered_json j;
  j["reward_mode"] = reward_mode_name(reward_mode);
  j["lambda1"] = lambda1;
  j["lambda2"] = lambda2;
  j["fidelity_weight"] = fidelity_weight;
  j["steps"] = steps;
  j["lr"] = lr;
  j["batch_size"] = batch_size;
  j["seed"] = seed;
  return j;
}

ReflConfig ReflConfig::from_json(const nlohmann::json& j) {
  ReflConfig c;
  if (j.contains("reward_mode")) c.reward_mode = reward_mode_from(j["reward_mode"].get<std::string>());
  c.lambda1 = j.value("lambda1", c.lambda1);
  c.lambda2 = j.value("lambda2", c.lambda2);
  c.fidelity_weight = j.value("fidelity_weight", c.fidelity_weight);
  c.steps = j.value("steps", c.steps);
  c.lr = j.value("lr", c.lr);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

void ReflConfig::validate() const {
  if (steps < 0 || batch_size < 1 || lr <= 0)
    throw std::invalid_argument("refl config: bad steps/batch/lr");
  if (fidelity_weight < 0) throw std::invalid_argument("refl config: negative fidelity weight");
}

Var reward_var(const Var& img, const rm::RewardModel& model, RewardMode mode, double lambda1,
               double lambda2) {
  if (mode == RewardMode::score_only) return model.forward_vars(img).score;
  if (model.stage() < 1)
    throw std::invalid_argument("decoupled reward requires a stage >= 1 reward model");
  auto feats = model.encode(img);
  Var map = model.decode(feats);
  Var plain_score = model.score_from(feats, nullptr);
  Var worst = nn::max_all(map);
  // lambda1 * S + lambda2 * (1 - max(map))
  return nn::add_scalar(nn::weighted_sum({plain_score, worst}, {lambda1, -lambda2}), lambda2);
}

StepLog refl_step(ToyGenerator& gen, const PairedBatchSet& data,
                  const std::vector<size_t>& batch_idx, const rm::RewardModel& model,
                  const ReflConfig& cfg, nn::Adam& opt) {
  if (batch_idx.empty()) throw std::invalid_argument("refl_step: empty batch");
  std::vector<Var> rewards, recons;
  for (size_t idx : batch_idx) {
    Var sr = gen.forward(nn::constant(data.lr.at(idx)));
    rewards.push_back(reward_var(sr, model, cfg.reward_mode, cfg.lambda1, cfg.lambda2));
    recons.push_back(nn::mse_loss(sr, nn::constant(data.gt.at(idx))));
  }
  Var mean_reward = nn::mean_of(rewards);
  Var mean_recon = nn::mean_of(recons);
  Var loss = nn::weighted_sum({mean_reward, mean_recon}, {-1.0, cfg.fidelity_weight});
  nn::backward(loss);
  if (!std::isfinite(loss->scalar()))
    throw std::runtime_error("refl_step: non-finite objective");
  for (const auto& [name, v] : gen.params())
    if (v->requires_grad && v->grad.numel())
      for (std::int64_t i = 0; i < v->grad.numel(); ++i)
        if (!std::isfinite(v->grad[i]))
          throw std::runtime_error("refl_step: non-finite gradient in " + name);
  opt.step(gen.params());

  StepLog log;
  log.stage = model.stage();
  log.mean_reward = mean_reward->scalar();
  log.fidelity = mean_recon->scalar();
  return log;
}

std::vector<double> CurriculumRunLog::rewards() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.mean_reward);
  return out;
}

namespace {

double probe_mean_reward(const PairedBatchSet& probe, const ToyGenerator& gen,
                         const rm::RewardModel& model, const ReflConfig& cfg) {
  double acc = 0.0;
  for (size_t i = 0; i < probe.size(); ++i) {
    Var sr = gen.forward(nn::constant(probe.lr[i]));
    acc += reward_var(sr, model, cfg.reward_mode, cfg.lambda1, cfg.lambda2)->scalar();
  }
  return probe.size() ? acc / static_cast<double>(probe.size()) : 0.0;
}

}  // namespace

CurriculumRunLog run_curriculum(ToyGenerator& gen, const PairedBatchSet& train,
                                const PairedBatchSet& probe, ccl::CurriculumState state,
                                ccl::RewardSourceCache& sources, const ReflConfig& cfg,
                                std::ostream* log) {
  cfg.validate();
  if (train.size() == 0) throw std::invalid_argument("run_curriculum: empty training set");
  gen.params().set_requires_grad(true);
  nn::Adam opt(cfg.lr);
  CurriculumRunLog run;

  int total_steps = 0;
  for (const auto& seg : state.segments) total_steps += seg.budget;

  core::Rng batch_rng(core::mix_seed(cfg.seed, "refl_batches"));
  auto draw_batch = [&](int) {
    std::vector<size_t> idx;
    for (int b = 0; b < cfg.batch_size; ++b)
      idx.push_back(static_cast<size_t>(
          batch_rng.uniform_int(static_cast<std::int64_t>(train.size()))));
    return idx;
  };

  const rm::RewardModel* current = &sources.get(state.segments[static_cast<size_t>(state.segment)]);
  const std::uint64_t rm_checksum = current->params().checksum();

  // The decoupled reward needs a map head; the stage-0 segment always scores
  // with the plain global path.
  auto cfg_for = [&cfg](const rm::RewardModel& m) {
    ReflConfig c = cfg;
    if (m.stage() == 0) c.reward_mode = RewardMode::score_only;
    return c;
  };

  for (int step = 0; step < total_steps; ++step) {
    StepLog s = refl_step(gen, train, draw_batch(step), *current, cfg_for(*current), opt);
    s.step = step;
    run.steps.push_back(s);
    if (log) {
      nlohmann::ordered_json j;
      j["step"] = step;
      j["stage"] = s.stage;
      j["reward"] = s.mean_reward;
      j["fidelity"] = s.fidelity;
      (*log) << j.dump() << "\n";
    }

    const int seg_before = state.segment;
    state = ccl::advance(state);
    if (state.segment != seg_before) {
      const rm::RewardModel* next =
          &sources.get(state.segments[static_cast<size_t>(state.segment)]);
      TransitionLog tr;
      tr.step = step + 1;
      tr.from_stage = state.segments[static_cast<size_t>(seg_before)].stage;
      tr.to_stage = state.k();
      tr.probe_reward_old = probe_mean_reward(probe, gen, *current, cfg_for(*current));
      tr.probe_reward_new = probe_mean_reward(probe, gen, *next, cfg_for(*next));
      tr.drift = std::abs(tr.probe_reward_new - tr.probe_reward_old);
      run.transitions.push_back(tr);
      if (log) {
        nlohmann::ordered_json j;
        j["transition_step"] = tr.step;
        j["from_stage"] = tr.from_stage;
        j["to_stage"] = tr.to_stage;
        j["probe_reward_old"] = tr.probe_reward_old;
        j["probe_reward_new"] = tr.probe_reward_new;
        j["drift"] = tr.drift;
        (*log) << j.dump() << "\n";
      }
      current = next;
    }
  }

  // Frozen-source contract: reward model parameters are untouched.
  if (sources.get(state.segments[0]).params().checksum() !=
      rm_checksum)
    throw std::logic_error("run_curriculum: reward model parameters changed during training");
  return run;
}

}  // namespace percep::refl
