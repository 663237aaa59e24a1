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

#include "percep/rm/rm.hpp"
#include "testutil.hpp"

using namespace percep;
using namespace percep::rm;
using nn::Var;

namespace {

LadderConfig tiny_config() {
  LadderConfig cfg;
  cfg.seed = 4242;
  cfg.enc_channels = {6, 10};
  cfg.head_hidden = 8;
  cfg.stages = {{0, 0, true}, {8, 0, false}, {12, 2, false}};
  return cfg;
}

RewardModel at_stage(const LadderConfig& cfg, int stage) {
  RewardModel m = RewardModel::init_stage0(cfg);
  for (int s = 0; s < stage; ++s) m = RewardModel::expand(m);
  return m;
}

}  // namespace

TEST_CASE("encoder produces the expected pyramid shapes on 64x64") {
  LadderConfig cfg;  // default 4 scales
  RewardModel m = RewardModel::init_stage0(cfg);
  core::Image img = testutil::make_texture_image(1, 64, 64);
  auto feats = m.encode(nn::constant(img.chw));
  REQUIRE(feats.size() == 4);
  const int want_hw[4] = {32, 16, 8, 4};
  for (int i = 0; i < 4; ++i) {
    CHECK(feats[static_cast<size_t>(i)]->val.dim(0) == cfg.enc_channels[static_cast<size_t>(i)]);
    CHECK(feats[static_cast<size_t>(i)]->val.dim(1) == want_hw[i]);
    CHECK(feats[static_cast<size_t>(i)]->val.dim(2) == want_hw[i]);
  }
}

TEST_CASE("encoder is deterministic and rejects indivisible inputs") {
  RewardModel m = at_stage(tiny_config(), 1);
  core::Image img = testutil::make_texture_image(2, 16, 16);
  auto f1 = m.encode(nn::constant(img.chw));
  auto f2 = m.encode(nn::constant(img.chw));
  for (size_t i = 0; i < f1.size(); ++i)
    for (std::int64_t k = 0; k < f1[i]->val.numel(); ++k) CHECK(f1[i]->val[k] == f2[i]->val[k]);

  core::Image odd = testutil::make_texture_image(3, 18, 16);
  CHECK_THROWS_WITH_AS(m.encode(nn::constant(odd.chw)), doctest::Contains("not divisible"),
                       std::invalid_argument);
}

TEST_CASE("feature shapes scale linearly with input size") {
  LadderConfig cfg;  // 4 scales, stride 16
  RewardModel m = RewardModel::init_stage0(cfg);
  for (int size : {32, 64, 128}) {
    core::Image img = testutil::make_texture_image(5, size, size);
    auto feats = m.encode(nn::constant(img.chw));
    for (int i = 0; i < 4; ++i)
      CHECK(feats[static_cast<size_t>(i)]->val.dim(1) == size >> (i + 1));
  }
}

TEST_CASE("decoder bias probes: zero head gives 0.5, -40 gives < 1e-17") {
  RewardModel m = at_stage(tiny_config(), 1);
  core::Image img = testutil::make_texture_image(7, 16, 16);
  // dec.head.w is zero-initialized at expansion, so the pre-sigmoid map is
  // exactly the head bias.
  m.params().at("dec.head.b")->val[0] = 0.0;
  auto feats = m.encode(nn::constant(img.chw));
  Var map0 = m.decode(feats);
  for (std::int64_t i = 0; i < map0->val.numel(); ++i) CHECK(map0->val[i] == 0.5);

  m.params().at("dec.head.b")->val[0] = -40.0;
  Var map_lo = m.decode(m.encode(nn::constant(img.chw)));
  for (std::int64_t i = 0; i < map_lo->val.numel(); ++i) {
    CHECK(map_lo->val[i] < 1e-17);
    CHECK(map_lo->val[i] > 0.0);
  }
}

TEST_CASE("decoded map is full resolution with values strictly inside (0,1)") {
  core::Rng noise(99);
  RewardModel m = at_stage(tiny_config(), 2);
  // Crank the head so the sigmoid saturates in places.
  auto head = m.params().at("dec.head.w");
  for (std::int64_t i = 0; i < head->val.numel(); ++i) head->val[i] = noise.uniform(-60.0, 60.0);
  for (std::uint64_t s = 0; s < 3; ++s) {
    core::Image img = testutil::make_texture_image(s, 32, 16);
    ForwardVars v = m.forward_vars(nn::constant(img.chw));
    REQUIRE(v.map);
    CHECK(v.map->val.dim(1) == 32);
    CHECK(v.map->val.dim(2) == 16);
    for (std::int64_t i = 0; i < v.map->val.numel(); ++i) {
      CHECK(v.map->val[i] > 0.0);
      CHECK(v.map->val[i] < 1.0);
    }
    CHECK(std::isfinite(v.score->scalar()));
  }
}

TEST_CASE("score with an all-ones map equals the unmodulated stage-0 head") {
  RewardModel m = at_stage(tiny_config(), 1);
  core::Image img = testutil::make_texture_image(11, 16, 16);
  auto feats = m.encode(nn::constant(img.chw));
  Var ones = nn::constant(core::Tensor::full({1, 16, 16}, 1.0));
  const double modulated = m.score_from(feats, ones)->scalar();
  const double plain = m.score_from(feats, nullptr)->scalar();
  CHECK(modulated == doctest::Approx(plain).epsilon(1e-15));
}

TEST_CASE("score with an all-zeros map is the head's bias path") {
  RewardModel m = at_stage(tiny_config(), 1);
  core::Image img = testutil::make_texture_image(12, 16, 16);
  auto feats = m.encode(nn::constant(img.chw));
  Var zeros = nn::constant(core::Tensor::zeros({1, 16, 16}));
  const double got = m.score_from(feats, zeros)->scalar();

  // Independent arithmetic: pooled features are all zero, so the score is
  // sigmoid(fc2(silu(fc1 bias))).
  const auto& fc1w = m.params().at("head.fc1.w")->val;
  const auto& fc1b = m.params().at("head.fc1.b")->val;
  const auto& fc2w = m.params().at("head.fc2.w")->val;
  const auto& fc2b = m.params().at("head.fc2.b")->val;
  double acc = fc2b[0];
  for (int i = 0; i < fc1w.dim(0); ++i) {
    const double pre = fc1b[i];
    const double act = pre / (1.0 + std::exp(-pre));
    acc += fc2w[i] * act;
  }
  const double want = 1.0 / (1.0 + std::exp(-acc));
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("perturbing the map in one region changes the score") {
  RewardModel m = at_stage(tiny_config(), 1);
  core::Image img = testutil::make_texture_image(13, 16, 16);
  auto feats = m.encode(nn::constant(img.chw));
  core::Tensor base = core::Tensor::full({1, 16, 16}, 0.5);
  core::Tensor bumped = base;
  for (int y = 4; y < 8; ++y)
    for (int x = 4; x < 8; ++x) bumped.at(0, y, x) = 0.9;
  const double s0 = m.score_from(feats, nn::constant(base))->scalar();
  const double s1 = m.score_from(feats, nn::constant(bumped))->scalar();
  CHECK(std::abs(s1 - s0) > 0.0);
}

TEST_CASE("forward contract per stage") {
  auto cfg = tiny_config();
  RewardModel m0 = at_stage(cfg, 0);
  core::Image img = testutil::make_texture_image(14, 16, 16);
  RewardOutput o0 = m0.forward(img);
  CHECK(o0.stage == 0);
  CHECK(!o0.map.has_value());
  CHECK(std::isfinite(o0.score));

  RewardModel m2 = at_stage(cfg, 2);
  RewardOutput o2 = m2.forward(img);
  CHECK(o2.stage == 2);
  REQUIRE(o2.map.has_value());
  CHECK(o2.map->dim(0) == 16);
  CHECK(o2.map->dim(1) == 16);
  CHECK_THROWS(m0.forward(testutil::make_texture_image(1, 18, 18)));
}

TEST_CASE("score gradient reaches decoder parameters at stage >= 1") {
  RewardModel m = at_stage(tiny_config(), 1);
  // Give the map head nonzero weights so the decoder actually modulates.
  core::Rng r(3);
  auto hw = m.params().at("dec.head.w");
  for (std::int64_t i = 0; i < hw->val.numel(); ++i) hw->val[i] = r.uniform(-0.5, 0.5);
  m.params().at("dec.head.b")->val[0] = 0.0;
  m.params().set_requires_grad(true);
  core::Image img = testutil::make_texture_image(15, 16, 16);
  ForwardVars v = m.forward_vars(nn::constant(img.chw));
  nn::backward(v.score);
  auto fuse_w = m.params().at("dec.fuse0.w");
  double norm = 0;
  for (std::int64_t i = 0; i < fuse_w->grad.numel(); ++i) norm += std::abs(fuse_w->grad[i]);
  CHECK(norm > 0.0);

  // Finite-difference agreement on one decoder coordinate.
  const double g = fuse_w->grad[0];
  const double v0 = fuse_w->val[0];
  const double h = 1e-5;
  fuse_w->val[0] = v0 + h;
  const double fp = m.forward_vars(nn::constant(img.chw)).score->scalar();
  fuse_w->val[0] = v0 - h;
  const double fm = m.forward_vars(nn::constant(img.chw)).score->scalar();
  fuse_w->val[0] = v0;
  CHECK(testutil::rel_err(g, (fp - fm) / (2 * h)) < 1e-4);
}

TEST_CASE("expansion carries weights over and grows capacity strictly") {
  auto cfg = tiny_config();
  RewardModel m0 = at_stage(cfg, 0);
  RewardModel m1 = RewardModel::expand(m0);
  RewardModel m2 = RewardModel::expand(m1);

  // Encoder and score head carried bitwise.
  for (const auto& [name, v] : m0.params()) {
    auto nv = m1.params().find(name);
    REQUIRE(nv);
    REQUIRE(nv->val.same_shape(v->val));
    for (std::int64_t i = 0; i < v->val.numel(); ++i) CHECK(nv->val[i] == v->val[i]);
  }
  // Widened decoder tensors contain the old block verbatim.
  {
    const auto& o = m1.params().at("dec.fuse0.w")->val;
    const auto& t = m2.params().at("dec.fuse0.w")->val;
    const int w1 = o.dim(0), w2 = t.dim(0);
    REQUIRE(w2 > w1);
    for (int a = 0; a < w1; ++a)
      for (int b = 0; b < w2; ++b)
        for (int y = 0; y < 3; ++y)
          for (int x = 0; x < 3; ++x) {
            const double got = t[((static_cast<std::int64_t>(a) * w2 + b) * 3 + y) * 3 + x];
            if (b < w1) {
              CHECK(got == o[((static_cast<std::int64_t>(a) * w1 + b) * 3 + y) * 3 + x]);
            } else {
              CHECK(got == 0.0);
            }
          }
  }

  const auto c0 = m0.parameter_count(), c1 = m1.parameter_count(), c2 = m2.parameter_count();
  CHECK(c0 < c1);
  CHECK(c1 < c2);
  CHECK(c0 == expected_parameter_count(cfg, 0));
  CHECK(c1 == expected_parameter_count(cfg, 1));
  CHECK(c2 == expected_parameter_count(cfg, 2));
  CHECK_THROWS(RewardModel::expand(m2));
}

TEST_CASE("zero-initialized adapters keep encoder features unchanged") {
  auto cfg = tiny_config();
  RewardModel m1 = at_stage(cfg, 1);
  RewardModel m2 = RewardModel::expand(m1);
  core::Image img = testutil::make_texture_image(17, 16, 16);
  auto f1 = m1.encode(nn::constant(img.chw));
  auto f2 = m2.encode(nn::constant(img.chw));
  REQUIRE(f1.size() == f2.size());
  for (size_t i = 0; i < f1.size(); ++i)
    for (std::int64_t k = 0; k < f1[i]->val.numel(); ++k)
      CHECK(std::abs(f1[i]->val[k] - f2[i]->val[k]) < 1e-6);
}

TEST_CASE("expansion continuity: scores barely move across every rung") {
  auto cfg = tiny_config();
  RewardModel prev = at_stage(cfg, 0);
  for (int s = 0; s < cfg.top_stage(); ++s) {
    RewardModel next = RewardModel::expand(prev);
    for (std::uint64_t i = 0; i < 8; ++i) {
      core::Image img = testutil::make_texture_image(100 + i, 16, 16);
      const double a = prev.forward(img).score;
      const double b = next.forward(img).score;
      CHECK(std::abs(a - b) <= 1e-5);
    }
    prev = std::move(next);
  }
}

TEST_CASE("save/load round trip preserves behavior exactly") {
  testutil::ScopedTempDir tmp("rmio");
  RewardModel m = at_stage(tiny_config(), 2);
  core::Image img = testutil::make_texture_image(18, 16, 16);
  RewardOutput a = m.forward(img);
  const auto p = tmp.path() / "rm.ckpt";
  m.save(p);
  RewardModel back = RewardModel::load(p);
  CHECK(back.stage() == 2);
  RewardOutput b = back.forward(img);
  CHECK(a.score == b.score);
  REQUIRE(b.map.has_value());
  for (std::int64_t i = 0; i < a.map->numel(); ++i) CHECK((*a.map)[i] == (*b.map)[i]);
}

TEST_CASE("trainability follows the stage spec") {
  auto cfg = tiny_config();
  cfg.stages[2].backbone_frozen = true;
  RewardModel m2 = at_stage(cfg, 2);
  m2.set_trainable();
  CHECK(!m2.params().at("enc.s0.a.w")->requires_grad);
  CHECK(m2.params().at("adapter.s0.down.w")->requires_grad);
  CHECK(m2.params().at("dec.fuse0.w")->requires_grad);
  CHECK(m2.params().at("head.fc1.w")->requires_grad);

  RewardModel m0 = at_stage(cfg, 0);
  m0.set_trainable();
  CHECK(!m0.params().at("enc.s0.a.w")->requires_grad);
  CHECK(!m0.params().at("head.fc1.w")->requires_grad);
}

TEST_CASE("non-monotone ladder configs are rejected") {
  auto cfg = tiny_config();
  cfg.stages[2].decoder_width = 4;  // narrower than stage 1
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  auto cfg2 = tiny_config();
  cfg2.stages[0].decoder_width = 8;
  CHECK_THROWS_AS(cfg2.validate(), std::invalid_argument);
}
