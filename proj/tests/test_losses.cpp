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

#include <cmath>

#include "percep/core/io.hpp"
#include "percep/core/procgen.hpp"
#include "percep/losses/losses.hpp"
#include "testutil.hpp"

using namespace percep;
using namespace percep::losses;

namespace {

// Tiny dataset: 16x16 samples so the 2-scale model trains in milliseconds.
struct TinyWorld {
  testutil::ScopedTempDir tmp{"losses"};
  fgrstore::Manifest manifest;
  std::unique_ptr<gtpdm::FeatureExtractor> extractor = gtpdm::make_random_projector(3, 12);
  rm::LadderConfig ladder;

  TinyWorld() {
    const auto gt_dir = tmp.path() / "gt";
    std::filesystem::create_directories(gt_dir);
    for (int i = 0; i < 4; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "img_%02d.png", i);
      core::write_image_png16(gt_dir / name, core::make_texture_image(300 + i, 32, 32));
    }
    fgrstore::BuildConfig cfg;
    cfg.n_samples = 12;
    cfg.image_size = 16;
    cfg.mixture = {0.6, 0.4, 0.0};
    cfg.coverage = {0.1, 0.4};
    cfg.pool_generators = {{1, 8, 1, 15, 2e-3}};
    cfg.splits = {1.0, 0.0, 0.0};
    manifest = fgrstore::build_dataset(gt_dir, {}, cfg, *extractor, 17, tmp.path() / "ds");

    ladder.seed = 777;
    ladder.enc_channels = {6, 10};
    ladder.head_hidden = 8;
    ladder.stages = {{0, 0, true}, {8, 0, false}, {12, 2, false}};
  }

  fgrstore::DatasetView train() const {
    return fgrstore::load_split(manifest, tmp.path() / "ds", "train");
  }
  rm::RewardModel base() const { return rm::RewardModel::init_stage0(ladder); }
  rm::RewardModel stage1() const { return rm::RewardModel::expand(base()); }
};

TinyWorld& world() {
  static TinyWorld w;
  return w;
}

}  // namespace

TEST_CASE("map loss worked examples and brute-force oracle") {
  core::Tensor a = core::Tensor::full({4, 4}, 0.5);
  core::Tensor b = core::Tensor::zeros({4, 4});
  CHECK(l_map_value(a, a) == 0.0);
  CHECK(l_map_value(a, b) == doctest::Approx(0.5).epsilon(1e-15));

  core::Rng r(1);
  core::Tensor x({4, 4}), y({4, 4});
  for (int i = 0; i < 16; ++i) {
    x[i] = r.uniform();
    y[i] = r.uniform();
  }
  double want = 0;
  for (int i = 0; i < 16; ++i) want += std::abs(x[i] - y[i]);
  want /= 16;
  CHECK(std::abs(l_map_value(x, y) - want) < 1e-12);
  CHECK_THROWS(l_map_value(x, core::Tensor::zeros({3, 4})));
}

TEST_CASE("ranking loss worked examples") {
  CHECK(l_rank_value(0.1, 0.5, 0.9, 0.2, 0.2) == 0.0);
  CHECK(l_rank_value(0.3, 0.4, 0.9, 0.2, 0.2) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(l_rank_value(0.9, 0.4, 0.3, 0.2, 0.2) == doctest::Approx(1.0).epsilon(1e-15));
  // Zero exactly when both margins hold, boundary included (values chosen
  // exactly representable so the boundary really is the boundary).
  CHECK(l_rank_value(0.25, 0.5, 0.75, 0.25, 0.25) == 0.0);
  CHECK(l_rank_value(0.25, 0.5 + 1e-9, 0.75, 0.25, 0.25) > 0.0);
}

TEST_CASE("alignment loss worked examples") {
  CHECK(l_align_value(0.5, 0.5) == 0.0);
  CHECK(l_align_value(0.7, 0.5) == doctest::Approx(0.2).epsilon(1e-15));
  const double batch_mean = 0.5 * (l_align_value(0.7, 0.5) + l_align_value(0.4, 0.5));
  CHECK(batch_mean == doctest::Approx(0.15).epsilon(1e-15));
}

TEST_CASE("weights are validated") {
  LossWeights w;
  w.lambda_map = -1;
  CHECK_THROWS(w.validate());
  LossWeights w2;
  w2.m1 = 1.5;
  CHECK_THROWS(w2.validate());
}

TEST_CASE("batch loss total is the weighted sum of its terms") {
  auto& w = world();
  rm::RewardModel model = w.stage1();
  auto train = w.train();
  std::vector<fgrstore::SampleTriplet> batch{train.load(0), train.load(1), train.load(2)};
  rm::RewardModel base = w.base();
  std::vector<double> bases;
  for (const auto& t : batch) bases.push_back(base.forward(t.gt).score);

  LossWeights lw;
  lw.lambda_map = 0.7;
  lw.lambda_rank = 1.3;
  lw.lambda_align = 0.2;
  BatchGraph g = batch_loss(model, batch, bases, lw);
  const double want = 0.7 * g.map_term->scalar() + 1.3 * g.rank_term->scalar() +
                      0.2 * g.align_term->scalar();
  CHECK(std::abs(g.total->scalar() - want) < 1e-9);
}

TEST_CASE("loss gradients match finite differences through the full model") {
  auto& w = world();
  rm::RewardModel model = w.stage1();
  // Push the score path away from the align-loss kink (the fresh expansion
  // scores are within ~1e-7 of the base, where |.| has no derivative).
  model.params().at("head.fc2.b")->val[0] += 0.8;
  model.set_trainable();
  auto train = w.train();
  std::vector<fgrstore::SampleTriplet> batch{train.load(0), train.load(1)};
  rm::RewardModel base = w.base();
  std::vector<double> bases;
  for (const auto& t : batch) bases.push_back(base.forward(t.gt).score);
  LossWeights lw;

  BatchGraph g0 = batch_loss(model, batch, bases, lw);
  nn::backward(g0.total);

  core::Rng pick(5);
  for (const char* pname : {"enc.s0.a.w", "dec.fuse0.w", "head.fc1.w", "dec.head.b"}) {
    auto p = model.params().at(pname);
    const std::int64_t i = pick.uniform_int(p->val.numel());
    const double g_ana = p->grad[i];
    const double v0 = p->val[i];
    const double h = 1e-5 * std::max(1.0, std::abs(v0));
    p->val[i] = v0 + h;
    const double fp = batch_loss(model, batch, bases, lw).total->scalar();
    p->val[i] = v0 - h;
    const double fm = batch_loss(model, batch, bases, lw).total->scalar();
    p->val[i] = v0;
    const double g_num = (fp - fm) / (2 * h);
    if (std::abs(g_num) < 1e-12 && std::abs(g_ana) < 1e-12) continue;
    INFO(pname, " coord ", i);
    CHECK(testutil::rel_err(g_ana, g_num) < 1e-4);
  }
}

TEST_CASE("train_rm refuses stage 0 and bad options") {
  auto& w = world();
  rm::RewardModel base = w.base();
  rm::RewardModel m0 = w.base();
  auto train = w.train();
  CHECK_THROWS_AS(train_rm(m0, base, train, {}, {}), std::invalid_argument);
}

TEST_CASE("all-zero weights leave parameters unchanged") {
  auto& w = world();
  rm::RewardModel model = w.stage1();
  rm::RewardModel base = w.base();
  const std::uint64_t before = model.params().checksum();
  LossWeights lw;
  lw.lambda_map = lw.lambda_rank = lw.lambda_align = 0.0;
  TrainRmOptions opt;
  opt.steps = 5;
  opt.batch_size = 2;
  train_rm(model, base, w.train(), lw, opt);
  CHECK(model.params().checksum() == before);
}

TEST_CASE("align-only training pulls clean-image scores toward the base") {
  auto& w = world();
  rm::RewardModel model = w.stage1();
  rm::RewardModel base = w.base();
  // Separate the score paths first so there is something to align.
  model.params().at("head.fc2.b")->val[0] += 1.5;
  auto train = w.train();

  double drift_before = 0.0;
  for (size_t i = 0; i < 6; ++i) {
    const auto t = train.load(i);
    drift_before += std::abs(model.forward(t.gt).score - base.forward(t.gt).score);
  }
  drift_before /= 6;

  LossWeights lw;
  lw.lambda_map = lw.lambda_rank = 0.0;
  lw.lambda_align = 1.0;
  TrainRmOptions opt;
  opt.steps = 120;
  opt.batch_size = 3;
  opt.lr = 5e-3;
  train_rm(model, base, train, lw, opt);

  double drift_after = 0.0;
  for (size_t i = 0; i < 6; ++i) {
    const auto t = train.load(i);
    drift_after += std::abs(model.forward(t.gt).score - base.forward(t.gt).score);
  }
  drift_after /= 6;
  CHECK(drift_before > 0.05);
  CHECK(drift_after < 0.3 * drift_before);
  CHECK(drift_after < 0.05);
}

TEST_CASE("single-triplet overfit drives the total loss down by 10x") {
  auto& w = world();
  rm::RewardModel model = w.stage1();
  rm::RewardModel base = w.base();
  // A one-sample view.
  fgrstore::DatasetView one(w.tmp.path() / "ds", {w.manifest.records[0]});
  LossWeights lw;
  TrainRmOptions opt;
  opt.steps = 500;
  opt.batch_size = 1;
  opt.lr = 3e-3;
  const auto reports = train_rm(model, base, one, lw, opt);
  REQUIRE(reports.size() == 500);
  CHECK(reports.back().l_total <= 0.1 * reports.front().l_total);
}

TEST_CASE("per-term gradient norms are reported on schedule") {
  auto& w = world();
  rm::RewardModel model = w.stage1();
  rm::RewardModel base = w.base();
  TrainRmOptions opt;
  opt.steps = 4;
  opt.batch_size = 2;
  opt.grad_log_every = 2;
  const auto reports = train_rm(model, base, w.train(), {}, opt);
  REQUIRE(reports.size() == 4);
  CHECK(reports[0].g_map.has_value());
  CHECK(!reports[1].g_map.has_value());
  CHECK(reports[2].g_map.has_value());
  CHECK(reports[0].g_total > 0.0);
}

TEST_CASE("non-finite losses abort naming the batch") {
  auto& w = world();
  rm::RewardModel model = w.stage1();
  rm::RewardModel base = w.base();
  model.params().at("head.fc1.w")->val[0] = std::numeric_limits<double>::quiet_NaN();
  TrainRmOptions opt;
  opt.steps = 1;
  opt.batch_size = 1;
  CHECK_THROWS_WITH_AS(train_rm(model, base, w.train(), {}, opt), doctest::Contains("batch "),
                       std::runtime_error);
}

TEST_CASE("training runs are deterministic in the seed") {
  auto& w = world();
  auto run = [&] {
    rm::RewardModel model = w.stage1();
    rm::RewardModel base = w.base();
    TrainRmOptions opt;
    opt.steps = 10;
    opt.batch_size = 2;
    train_rm(model, base, w.train(), {}, opt);
    return model.params().checksum();
  };
  CHECK(run() == run());
}
