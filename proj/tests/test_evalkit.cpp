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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "percep/core/hash.hpp"
#include "percep/core/io.hpp"
#include "percep/core/procgen.hpp"
#include "percep/evalkit/evalkit.hpp"
#include "testutil.hpp"

using namespace percep;
using namespace percep::evalkit;

TEST_CASE("rank accuracy: oracle, constant, and hand-labeled sets") {
  std::vector<std::array<double, 3>> perfect(10, {0.0, 0.5, 1.0});
  CHECK(rank_accuracy_of_scores(perfect) == 1.0);

  std::vector<std::array<double, 3>> ties(5, {0.4, 0.4, 0.4});
  CHECK(rank_accuracy_of_scores(ties) == 0.0);

  // 20 hand-labeled triplets; 13 satisfy the strict ordering by hand count.
  std::vector<std::array<double, 3>> hand;
  for (int i = 0; i < 13; ++i)
    hand.push_back({0.1 + i * 0.01, 0.4 + i * 0.01, 0.8 + i * 0.01});
  for (int i = 0; i < 4; ++i) hand.push_back({0.9, 0.5, 0.1});   // inverted
  for (int i = 0; i < 3; ++i) hand.push_back({0.2, 0.2, 0.9});   // tie at the bottom
  CHECK(rank_accuracy_of_scores(hand) == doctest::Approx(13.0 / 20.0));
  CHECK_THROWS(rank_accuracy_of_scores({}));
}

TEST_CASE("pdm auc: perfect separation, constant prediction, oracle, and errors") {
  core::Mask mask(3, 3, core::MaskKind::rect);
  mask.at(0, 0) = mask.at(1, 1) = mask.at(2, 2) = mask.at(0, 2) = 1;

  core::Tensor perfect({3, 3});
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) perfect.at(y, x) = mask.at(y, x);
  CHECK(pdm_auc(perfect, mask) == 1.0);

  CHECK(pdm_auc(core::Tensor::full({3, 3}, 0.7), mask) == 0.5);

  // Pairwise Mann-Whitney oracle on a random prediction.
  core::Rng r(3);
  core::Tensor pred({3, 3});
  for (std::int64_t i = 0; i < 9; ++i) pred[i] = r.uniform();
  pred[4] = pred[1];  // inject a tie across classes
  double wins = 0.0;
  std::int64_t pairs = 0;
  for (int p = 0; p < 9; ++p)
    for (int n = 0; n < 9; ++n) {
      if (!mask.grid[static_cast<size_t>(p)] || mask.grid[static_cast<size_t>(n)]) continue;
      ++pairs;
      if (pred[p] > pred[n]) wins += 1.0;
      else if (pred[p] == pred[n]) wins += 0.5;
    }
  CHECK(std::abs(pdm_auc(pred, mask) - wins / static_cast<double>(pairs)) < 1e-12);

  core::Mask all_ones(3, 3, core::MaskKind::rect);
  for (auto& v : all_ones.grid) v = 1;
  CHECK_THROWS(pdm_auc(pred, all_ones));
}

TEST_CASE("pdm auc is invariant under strictly monotone transforms") {
  core::Rng r(9);
  core::Mask mask(6, 6, core::MaskKind::rect);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) mask.at(y, x) = r.uniform() < 0.4 ? 1 : 0;
  mask.at(0, 0) = 1;
  mask.at(5, 5) = 0;
  core::Tensor pred({6, 6});
  for (std::int64_t i = 0; i < 36; ++i) pred[i] = r.uniform();
  const double base = pdm_auc(pred, mask);
  core::Tensor cubed = pred, expd = pred;
  for (std::int64_t i = 0; i < 36; ++i) {
    cubed[i] = pred[i] * pred[i] * pred[i];
    expd[i] = std::exp(3.0 * pred[i]);
  }
  CHECK(pdm_auc(cubed, mask) == doctest::Approx(base).epsilon(1e-12));
  CHECK(pdm_auc(expd, mask) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("curve stats: flat curves have zero early variance") {
  std::vector<double> flat(100, 0.4);
  CurveStats s = curve_stats(flat, 25, 0.2);
  CHECK(s.early_std < 1e-12);
  CHECK(s.final_reward == doctest::Approx(0.4));

  std::vector<double> ramp;
  for (int i = 0; i < 100; ++i) ramp.push_back(i / 100.0);
  CurveStats s2 = curve_stats(ramp, 25, 0.2);
  CHECK(s2.early_std > 0.0);
  CHECK(s2.final_reward > 0.8);
}

TEST_CASE("structure probes preserve the pixel histogram inside the mask exactly") {
  testutil::ScopedTempDir tmp("probe");
  // Tiny one-record view written by hand.
  core::Image gt = core::make_texture_image(1, 32, 32);
  gt.chw = core::quantize_u16_grid(std::move(gt.chw));
  fgrstore::SampleRecord rec;
  rec.sample_id = "p0";
  rec.split = "test";
  rec.gt_path = "gt.png";
  rec.sr_path = "gt.png";
  rec.syn_path = "gt.png";
  rec.mask_path = "mask.png";
  rec.mgt_path = "mgt.png";
  rec.recipe.scale = 1;
  rec.mask_kind = "rect";
  core::write_image_png16(tmp.path() / "gt.png", gt);
  core::Mask dummy(32, 32, core::MaskKind::rect);
  dummy.at(0, 0) = 1;
  core::write_mask_png(tmp.path() / "mask.png", dummy);
  core::write_map_png16(tmp.path() / "mgt.png", core::Tensor::zeros({32, 32}));
  fgrstore::DatasetView view(tmp.path(), {rec});

  std::vector<core::Mask> masks{core::make_blob_mask(5, 32, 32, {0.15, 0.3})};
  auto probes = make_structure_probes(view, masks, 11, 8);
  REQUIRE(probes.size() == 1);
  const auto& p = probes[0];

  // The multiset of masked pixel values is unchanged (spatial permutation).
  for (int c = 0; c < 3; ++c) {
    std::vector<double> before, after;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        if (p.mask.at(y, x)) {
          before.push_back(gt.at(c, y, x));
          after.push_back(p.syn.at(c, y, x));
        }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);
  }
  // Outside the mask nothing moves.
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        if (!p.mask.at(y, x)) CHECK(p.syn.at(c, y, x) == gt.at(c, y, x));
  // And something did move inside.
  double moved = 0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) moved += std::abs(p.syn.at(c, y, x) - gt.at(c, y, x));
  CHECK(moved > 0.0);

  auto probes2 = make_structure_probes(view, masks, 11, 8);
  for (std::int64_t i = 0; i < p.syn.chw.numel(); ++i)
    CHECK(probes2[0].syn.chw[i] == p.syn.chw[i]);
}

TEST_CASE("report emission: empty inputs produce a marked summary and no plots") {
  testutil::ScopedTempDir tmp("report0");
  ReportInputs in;
  auto files = emit_report(in, tmp.path());
  REQUIRE(files.size() == 1);
  std::ifstream f(files[0]);
  std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(body.find("no runs") != std::string::npos);
  CHECK(!std::filesystem::exists(tmp.path() / "plots" / "reward_curves.png"));
}

TEST_CASE("report emission: two runs share one curve figure; overlays re-render bit-identically") {
  testutil::ScopedTempDir tmp("report1");
  ReportInputs in;
  std::vector<double> a, b;
  for (int i = 0; i < 60; ++i) {
    a.push_back(0.3 + i * 0.01);
    b.push_back(0.5 + 0.1 * std::sin(i * 0.3));
  }
  in.reward_curves = {{"run_a", a}, {"run_b", b}};
  core::Image syn = core::make_texture_image(4, 32, 32);
  core::Tensor map({32, 32});
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) map.at(y, x) = (y > 10 && y < 20 && x > 8 && x < 24) ? 0.9 : 0.05;
  in.overlays.push_back({"s0", syn, map});
  auto files = emit_report(in, tmp.path() / "one");
  CHECK(std::filesystem::exists(tmp.path() / "one" / "plots" / "reward_curves.png"));
  CHECK(std::filesystem::exists(tmp.path() / "one" / "plots" / "overlay_s0.png"));

  auto files2 = emit_report(in, tmp.path() / "two");
  CHECK(core::hash_file_hex(tmp.path() / "one" / "plots" / "overlay_s0.png") ==
        core::hash_file_hex(tmp.path() / "two" / "plots" / "overlay_s0.png"));
  CHECK(core::hash_file_hex(tmp.path() / "one" / "summary.json") ==
        core::hash_file_hex(tmp.path() / "two" / "summary.json"));
}

TEST_CASE("verdict wiring follows the thresholds") {
  EvalReport r;
  r.rank_accuracy = 0.95;
  r.pdm_auc = 0.80;
  r.anchor_drift_per_stage = {0.02, 0.06};
  EvalThresholds t;
  auto v = r.verdicts(t);
  CHECK(v.at("rank_accuracy"));
  CHECK(!v.at("pdm_auc"));
  CHECK(!v.at("anchor_alignment"));
  CHECK(!r.all_pass(t));
  r.pdm_auc = 0.9;
  r.anchor_drift_per_stage = {0.02, 0.03};
  CHECK(r.all_pass(t));
}

namespace {

rm::RewardModel tiny_rm(int stage) {
  rm::LadderConfig cfg;
  cfg.seed = 123;
  cfg.enc_channels = {6, 10};
  cfg.head_hidden = 8;
  cfg.stages = {{0, 0, true}, {8, 0, false}, {12, 2, false}};
  rm::RewardModel m = rm::RewardModel::init_stage0(cfg);
  for (int s = 0; s < stage; ++s) m = rm::RewardModel::expand(m);
  m.freeze_all();
  return m;
}

}  // namespace

TEST_CASE("hacking probe: identical sources tie; zero steps give the null case") {
  rm::RewardModel m0 = tiny_rm(0);
  rm::RewardModel m2 = tiny_rm(2);

  HackingProbeInputs in;
  in.gen_template.seed = 5;
  in.gen_template.scale = 2;
  in.gen_template.width = 10;
  in.gen_template.blocks = 1;
  degrade::DegradeProfile profile;
  profile.scale = 2;
  profile.use_jpeg = false;
  for (int i = 0; i < 3; ++i) {
    core::Image gt = core::make_texture_image(800 + i, 16, 16);
    const auto recipe = degrade::sample_recipe(900 + i, profile);
    in.train.lr.push_back(degrade::apply_pipeline(gt, recipe).chw);
    in.train.gt.push_back(gt.chw);
    in.probe.lr.push_back(in.train.lr.back());
    in.probe.gt.push_back(gt.chw);
    core::Tensor mgt({16, 16});
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) mgt.at(y, x) = (y < 8) ? 0.9 : 0.1;
    in.probe_mgt.push_back(mgt);
  }

  refl::ReflConfig cfg;
  cfg.steps = 6;
  cfg.batch_size = 2;
  // Control arm: the same source on both sides must tie exactly.
  HackingGap same = hacking_probe(in, m0, m0, cfg);
  CHECK(same.masked_error_rm0 == same.masked_error_rmN);
  CHECK(same.rm0_score_arm0 == same.rm0_score_armN);

  // Null case: untrained generators have identical (baseline) error.
  refl::ReflConfig zero = cfg;
  zero.steps = 0;
  HackingGap null_case = hacking_probe(in, m0, m2, zero);
  CHECK(null_case.masked_error_rm0 == null_case.masked_error_rmN);
}
