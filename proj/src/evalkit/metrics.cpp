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

#include "percep/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "percep/core/imageops.hpp"
#include "percep/nn/adam.hpp"

namespace percep::evalkit {

using core::Image;
using core::Mask;
using core::Tensor;

double rank_accuracy_of_scores(const std::vector<std::array<double, 3>>& scores) {
  if (scores.empty()) throw std::invalid_argument("rank_accuracy: empty triplet set");
  std::int64_t good = 0;
  for (const auto& [s_sr, s_syn, s_gt] : scores)
    if (s_gt > s_syn && s_syn > s_sr) ++good;
  return static_cast<double>(good) / static_cast<double>(scores.size());
}

namespace {

std::array<double, 3> score_triplet(const rm::RewardModel& model,
                                    const fgrstore::SampleTriplet& t) {
  return {model.forward(t.sr).score, model.forward(t.syn).score, model.forward(t.gt).score};
}

}  // namespace

double rank_accuracy(const rm::RewardModel& model, const fgrstore::DatasetView& view) {
  std::vector<std::array<double, 3>> scores;
  scores.reserve(view.size());
  for (size_t i = 0; i < view.size(); ++i) scores.push_back(score_triplet(model, view.load(i)));
  return rank_accuracy_of_scores(scores);
}

double rank_accuracy(const rm::RewardModel& model,
                     const std::vector<fgrstore::SampleTriplet>& triplets) {
  std::vector<std::array<double, 3>> scores;
  scores.reserve(triplets.size());
  for (const auto& t : triplets) scores.push_back(score_triplet(model, t));
  return rank_accuracy_of_scores(scores);
}

double pdm_auc(const Tensor& pred, const Mask& mask) {
  if (pred.rank() != 2 || pred.dim(0) != mask.h || pred.dim(1) != mask.w)
    throw std::invalid_argument("pdm_auc: prediction/mask shape mismatch");
  const std::int64_t n = pred.numel();
  const std::int64_t n_pos = mask.ones();
  const std::int64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("pdm_auc: mask has a single class");

  std::vector<std::int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::int64_t a, std::int64_t b) { return pred[a] < pred[b]; });

  // Midranks over tied groups, then the rank-sum statistic.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && pred[order[j + 1]] == pred[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k)
      if (mask.grid[static_cast<size_t>(order[k])]) pos_rank_sum += midrank;
    i = j + 1;
  }
  const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

double auc_of_sample(const rm::RewardModel& model, const Image& syn, const Mask& mask) {
  rm::RewardOutput out = model.forward(syn);
  if (!out.map) throw std::invalid_argument("mean_pdm_auc: model has no map head");
  return pdm_auc(*out.map, mask);
}

}  // namespace

double mean_pdm_auc(const rm::RewardModel& model, const fgrstore::DatasetView& view) {
  if (view.size() == 0) throw std::invalid_argument("mean_pdm_auc: empty view");
  double acc = 0.0;
  for (size_t i = 0; i < view.size(); ++i) {
    const auto t = view.load(i);
    acc += auc_of_sample(model, t.syn, t.mask);
  }
  return acc / static_cast<double>(view.size());
}

double mean_pdm_auc(const rm::RewardModel& model,
                    const std::vector<fgrstore::SampleTriplet>& triplets) {
  if (triplets.empty()) throw std::invalid_argument("mean_pdm_auc: empty set");
  double acc = 0.0;
  for (const auto& t : triplets) acc += auc_of_sample(model, t.syn, t.mask);
  return acc / static_cast<double>(triplets.size());
}

double anchor_drift(const rm::RewardModel& model, const rm::RewardModel& base,
                    const fgrstore::DatasetView& view) {
  if (view.size() == 0) throw std::invalid_argument("anchor_drift: empty view");
  double acc = 0.0;
  for (size_t i = 0; i < view.size(); ++i) {
    const auto t = view.load(i);
    acc += std::abs(model.forward(t.gt).score - base.forward(t.gt).score);
  }
  return acc / static_cast<double>(view.size());
}

std::vector<double> smooth(const std::vector<double>& xs, int window) {
  if (window < 1) throw std::invalid_argument("smooth: bad window");
  const int n = static_cast<int>(xs.size());
  std::vector<double> out(xs.size());
  const int half = window / 2;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) acc += xs[static_cast<size_t>(k)];
    out[static_cast<size_t>(i)] = acc / (hi - lo + 1);
  }
  return out;
}

CurveStats curve_stats(const std::vector<double>& rewards, int window, double early_frac) {
  if (rewards.empty()) throw std::invalid_argument("curve_stats: empty curve");
  const std::vector<double> s = smooth(rewards, window);
  const auto n_early =
      std::max<size_t>(2, static_cast<size_t>(std::floor(early_frac * static_cast<double>(s.size()))));
  const size_t m = std::min(n_early, s.size());
  double mean = 0.0;
  for (size_t i = 0; i < m; ++i) mean += s[i];
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (size_t i = 0; i < m; ++i) var += (s[i] - mean) * (s[i] - mean);
  var /= static_cast<double>(m);
  return {std::sqrt(var), s.back()};
}

std::vector<fgrstore::SampleTriplet> make_tiny_swap_triplets(
    const fgrstore::DatasetView& view, std::pair<double, double> coverage, std::uint64_t seed,
    const gtpdm::FeatureExtractor& extractor, double alpha) {
  std::vector<fgrstore::SampleTriplet> out;
  out.reserve(view.size());
  for (size_t i = 0; i < view.size(); ++i) {
    fgrstore::SampleTriplet t = view.load(i);
    const std::uint64_t mask_seed = core::mix_seed(seed, t.sample_id);
    t.mask = synth::gen_rect_mask(t.gt.height(), t.gt.width(), mask_seed, coverage);
    t.syn = synth::region_swap(t.gt, t.sr, t.mask);
    t.m_gt = gtpdm::build_gt_pdm(t.syn, t.gt, extractor, alpha).grid;
    t.sample_id += "-tiny";
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<StructureProbe> make_structure_probes(const fgrstore::DatasetView& view,
                                                  const std::vector<Mask>& semantic_masks,
                                                  std::uint64_t seed, int block) {
  if (semantic_masks.empty()) throw std::invalid_argument("structure probes: no masks");
  if (block < 2) throw std::invalid_argument("structure probes: block must be >= 2");
  std::vector<StructureProbe> out;
  for (size_t i = 0; i < view.size(); ++i) {
    const fgrstore::SampleTriplet t = view.load(i);
    const int h = t.gt.height(), w = t.gt.width();
    core::Rng rng(core::mix_seed(seed, t.sample_id));
    const Mask& m =
        semantic_masks[static_cast<size_t>(rng.uniform_int(static_cast<std::int64_t>(semantic_masks.size())))];
    if (m.h != h || m.w != w) throw std::invalid_argument("structure probes: mask size mismatch");

    // Transpose content within aligned blocks, but only between positions
    // that are both inside the mask: an exact spatial permutation.
    Image syn = t.gt;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!m.at(y, x)) continue;
        const int by = (y / block) * block, bx = (x / block) * block;
        const int py = by + (x - bx), px = bx + (y - by);
        if (py >= h || px >= w || !m.at(py, px)) continue;
        for (int c = 0; c < 3; ++c) syn.at(c, y, x) = t.gt.at(c, py, px);
      }
    out.push_back({std::move(syn), m});
  }
  return out;
}

double mean_pdm_auc_on_probes(const rm::RewardModel& model,
                              const std::vector<StructureProbe>& probes) {
  if (probes.empty()) throw std::invalid_argument("mean_pdm_auc_on_probes: empty set");
  double acc = 0.0;
  for (const auto& p : probes) acc += auc_of_sample(model, p.syn, p.mask);
  return acc / static_cast<double>(probes.size());
}

namespace {

double quantile_threshold(const Tensor& m, double q) {
  std::vector<double> v(m.data(), m.data() + m.numel());
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<size_t>(
      std::min<double>(static_cast<double>(v.size() - 1), std::floor(q * static_cast<double>(v.size()))));
  return v[idx];
}

refl::ToyGenerator train_arm(const HackingProbeInputs& in, const rm::RewardModel& reward_model,
                             const refl::ReflConfig& cfg) {
  refl::ToyGenerator gen = refl::ToyGenerator::init(in.gen_template);
  gen.params().set_requires_grad(true);
  nn::Adam opt(cfg.lr);
  core::Rng rng(core::mix_seed(cfg.seed, "hacking_probe_batches"));
  refl::ReflConfig arm_cfg = cfg;
  if (reward_model.stage() == 0) arm_cfg.reward_mode = refl::RewardMode::score_only;
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<size_t> idx;
    for (int b = 0; b < cfg.batch_size; ++b)
      idx.push_back(static_cast<size_t>(
          rng.uniform_int(static_cast<std::int64_t>(in.train.size()))));
    refl::refl_step(gen, in.train, idx, reward_model, arm_cfg, opt);
  }
  gen.params().set_requires_grad(false);
  return gen;
}

}  // namespace

HackingGap hacking_probe(const HackingProbeInputs& in, const rm::RewardModel& rm0,
                         const rm::RewardModel& rmN, const refl::ReflConfig& cfg) {
  if (in.probe.size() == 0 || in.probe.size() != in.probe_mgt.size())
    throw std::invalid_argument("hacking_probe: bad probe set");
  // Both arms start from the same template seed and see the same batch
  // stream; only the reward source differs.
  const std::uint64_t ck0 = rm0.params().checksum();
  const std::uint64_t ckN = rmN.params().checksum();
  refl::ToyGenerator arm0 = train_arm(in, rm0, cfg);
  refl::ToyGenerator armN = train_arm(in, rmN, cfg);
  if (rm0.params().checksum() != ck0 || rmN.params().checksum() != ckN)
    throw std::logic_error("hacking_probe: reward model parameters changed");

  HackingGap gap;
  double err0 = 0.0, errN = 0.0, s0 = 0.0, sN = 0.0;
  for (size_t i = 0; i < in.probe.size(); ++i) {
    const Image gt{in.probe.gt[i]};
    const Image lr{in.probe.lr[i]};
    const Image out0 = arm0.upscale(lr);
    const Image outN = armN.upscale(lr);
    const Tensor& mgt = in.probe_mgt[i];
    const double thr = quantile_threshold(mgt, in.mgt_quantile);
    double e0 = 0.0, eN = 0.0;
    std::int64_t n_px = 0;
    for (int y = 0; y < gt.height(); ++y)
      for (int x = 0; x < gt.width(); ++x) {
        if (mgt.at(y, x) < thr) continue;
        ++n_px;
        for (int c = 0; c < 3; ++c) {
          e0 += std::abs(out0.at(c, y, x) - gt.at(c, y, x));
          eN += std::abs(outN.at(c, y, x) - gt.at(c, y, x));
        }
      }
    if (n_px == 0) continue;
    err0 += e0 / (3.0 * static_cast<double>(n_px));
    errN += eN / (3.0 * static_cast<double>(n_px));
    s0 += rm0.forward(out0).score;
    sN += rm0.forward(outN).score;
  }
  const auto n = static_cast<double>(in.probe.size());
  gap.masked_error_rm0 = err0 / n;
  gap.masked_error_rmN = errN / n;
  gap.rm0_score_arm0 = s0 / n;
  gap.rm0_score_armN = sN / n;
  return gap;
}

}  // namespace percep::evalkit
