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

#include "percep/losses/losses.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "percep/nn/adam.hpp"

namespace percep::losses {

using core::Tensor;
using nn::Var;

void LossWeights::validate() const {
  for (double v : {lambda_map, lambda_rank, lambda_align, m1, m2})
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("loss weights: all values must be finite and nonnegative");
  if (m1 >= 1.0 || m2 >= 1.0)
    throw std::invalid_argument("loss weights: margins must sit inside the [0,1] score scale");
}

double l_map_value(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) throw std::invalid_argument("l_map: shape mismatch");
  double acc = 0.0;
  for (std::int64_t i = 0; i < pred.numel(); ++i) acc += std::abs(pred[i] - target[i]);
  return acc / static_cast<double>(pred.numel());
}

double l_rank_value(double s_sr, double s_syn, double s_gt, double m1, double m2) {
  return std::max(0.0, m1 - (s_syn - s_sr)) + std::max(0.0, m2 - (s_gt - s_syn));
}

double l_align_value(double s_gt_current, double s_gt_base) {
  return std::abs(s_gt_current - s_gt_base);
}

double BaseScoreCache::score(const fgrstore::DatasetView& view, size_t idx, const core::Image& gt) {
  const std::string& id = view.record(idx).sample_id;
  auto it = cache_.find(id);
  if (it != cache_.end()) return it->second;
  const double s = base_->forward(gt).score;
  cache_.emplace(id, s);
  return s;
}

BatchGraph batch_loss(const rm::RewardModel& model,
                      const std::vector<fgrstore::SampleTriplet>& batch,
                      const std::vector<double>& base_scores, const LossWeights& w) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  if (batch.size() != base_scores.size())
    throw std::invalid_argument("batch_loss: base score count mismatch");

  std::vector<Var> map_terms, rank_terms, align_terms;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch[i];
    rm::ForwardVars syn = model.forward_vars(nn::leaf(t.syn.chw));
    rm::ForwardVars sr = model.forward_vars(nn::leaf(t.sr.chw));
    rm::ForwardVars gt = model.forward_vars(nn::leaf(t.gt.chw));

    Tensor target({1, t.m_gt.dim(0), t.m_gt.dim(1)});
    for (std::int64_t k = 0; k < t.m_gt.numel(); ++k) target[k] = t.m_gt[k];
    map_terms.push_back(nn::l1_loss(syn.map, nn::constant(std::move(target))));

    Var r1 = nn::hinge(w.m1, nn::sub(syn.score, sr.score));
    Var r2 = nn::hinge(w.m2, nn::sub(gt.score, syn.score));
    rank_terms.push_back(nn::weighted_sum({r1, r2}, {1.0, 1.0}));

    align_terms.push_back(nn::abs_diff(gt.score, nn::constant_scalar(base_scores[i])));
  }
  BatchGraph g;
  g.map_term = nn::mean_of(map_terms);
  g.rank_term = nn::mean_of(rank_terms);
  g.align_term = nn::mean_of(align_terms);
  g.total = nn::weighted_sum({g.map_term, g.rank_term, g.align_term},
                             {w.lambda_map, w.lambda_rank, w.lambda_align});
  return g;
}

std::vector<LossReport> train_rm(rm::RewardModel& model, const rm::RewardModel& base,
                                 const fgrstore::DatasetView& train, const LossWeights& weights,
                                 const TrainRmOptions& opt, std::ostream* log) {
  weights.validate();
  if (model.stage() < 1)
    throw std::invalid_argument("train_rm: stage 0 is the frozen base and is not trained");
  if (opt.steps < 0 || opt.batch_size < 1) throw std::invalid_argument("train_rm: bad options");

  model.set_trainable();
  nn::Adam opt_state(opt.lr);
  BaseScoreCache base_scores(base);

  std::vector<LossReport> reports;
  reports.reserve(static_cast<size_t>(opt.steps));

  int step = 0;
  std::uint64_t epoch = 0;
  while (step < opt.steps) {
    const auto batches = train.epoch_batches(opt.batch_size, core::mix_seed(opt.seed, epoch));
    ++epoch;
    for (const auto& idxs : batches) {
      if (step >= opt.steps) break;
      std::vector<fgrstore::SampleTriplet> batch;
      std::vector<double> bases;
      std::string batch_ids;
      for (size_t idx : idxs) {
        batch.push_back(train.load(idx));
        bases.push_back(base_scores.score(train, idx, batch.back().gt));
        if (!batch_ids.empty()) batch_ids += ",";
        batch_ids += batch.back().sample_id;
      }

      LossReport rep;
      const bool full_grads = opt.grad_log_every > 0 && step % opt.grad_log_every == 0;
      if (full_grads) {
        // Separate backward passes give per-term gradient norms; the final
        // total pass leaves the combined gradients in place for the update.
        BatchGraph g = batch_loss(model, batch, bases, weights);
        nn::backward(g.map_term);
        rep.g_map = model.params().grad_norm();
        nn::backward(g.rank_term);
        rep.g_rank = model.params().grad_norm();
        nn::backward(g.align_term);
        rep.g_align = model.params().grad_norm();
        nn::backward(g.total);
        rep.l_map = g.map_term->scalar();
        rep.l_rank = g.rank_term->scalar();
        rep.l_align = g.align_term->scalar();
        rep.l_total = g.total->scalar();
      } else {
        BatchGraph g = batch_loss(model, batch, bases, weights);
        nn::backward(g.total);
        rep.l_map = g.map_term->scalar();
        rep.l_rank = g.rank_term->scalar();
        rep.l_align = g.align_term->scalar();
        rep.l_total = g.total->scalar();
      }
      rep.g_total = model.params().grad_norm();

      if (!std::isfinite(rep.l_total))
        throw std::runtime_error("train_rm: non-finite loss at step " + std::to_string(step) +
                                 " (batch " + batch_ids + ")");

      opt_state.step(model.params());

      if (log) {
        nlohmann::ordered_json j;
        j["step"] = step;
        j["stage"] = model.stage();
        j["l_map"] = rep.l_map;
        j["l_rank"] = rep.l_rank;
        j["l_align"] = rep.l_align;
        j["l_total"] = rep.l_total;
        j["g_total"] = rep.g_total;
        if (rep.g_map) {
          j["g_map"] = *rep.g_map;
          j["g_rank"] = *rep.g_rank;
          j["g_align"] = *rep.g_align;
        }
        (*log) << j.dump() << "\n";
      }
      reports.push_back(rep);
      ++step;
    }
  }
  return reports;
}

}  // namespace percep::losses
