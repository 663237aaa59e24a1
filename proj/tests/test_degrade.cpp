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

#include "percep/degrade/degrade.hpp"
#include "testutil.hpp"

using namespace percep;
using namespace percep::degrade;

TEST_CASE("identity recipe returns the image unchanged") {
  core::Image img = testutil::make_texture_image(1, 12, 12);
  DegradationRecipe r;
  r.seed = 0;
  r.scale = 1;
  core::Image out = apply_pipeline(img, r);
  REQUIRE(out.chw.same_shape(img.chw));
  for (std::int64_t i = 0; i < img.chw.numel(); ++i) CHECK(out.chw[i] == img.chw[i]);
}

TEST_CASE("box downsample of a constant image keeps the value") {
  core::Image img = core::Image::solid(3, 4, 4, 0.5);
  DegradationRecipe r;
  r.seed = 0;
  r.scale = 4;
  DegradeOp d{};
  d.kind = DegradeOp::Kind::downsample;
  d.factor = 4;
  d.filter = DownFilter::box;
  r.ops.push_back(d);
  core::Image out = apply_pipeline(img, r);
  REQUIRE(out.height() == 1);
  REQUIRE(out.width() == 1);
  for (int c = 0; c < 3; ++c) CHECK(out.at(c, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("pipeline replay is bit identical") {
  core::Image img = testutil::make_texture_image(2, 32, 32);
  DegradeProfile profile;  // defaults: blur, x4 box, noise, jpeg
  DegradationRecipe r = sample_recipe(7, profile);
  core::Image a = apply_pipeline(img, r);
  core::Image b = apply_pipeline(img, r);
  REQUIRE(a.chw.same_shape(b.chw));
  for (std::int64_t i = 0; i < a.chw.numel(); ++i) CHECK(a.chw[i] == b.chw[i]);
}

TEST_CASE("sample_recipe is deterministic in the seed") {
  DegradeProfile profile;
  const auto a = sample_recipe(0, profile).to_json().dump();
  const auto b = sample_recipe(0, profile).to_json().dump();
  CHECK(a == b);
  CHECK(a != sample_recipe(1, profile).to_json().dump());
}

TEST_CASE("degenerate single-point ranges produce exactly those values") {
  DegradeProfile p;
  p.blur_sigma = {1.5, 1.5};
  p.noise_sigma = {0.02, 0.02};
  p.jpeg_quality = {80, 80};
  DegradationRecipe r = sample_recipe(123, p);
  REQUIRE(r.ops.size() == 4);
  CHECK(r.ops[0].sigma == 1.5);
  CHECK(r.ops[2].noise_sigma == 0.02);
  CHECK(r.ops[3].quality == 80);
}

TEST_CASE("sampled blur sigma stays inside the profile range over a seed sweep") {
  DegradeProfile p;
  p.blur_sigma = {1.0, 2.0};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    DegradationRecipe r = sample_recipe(seed, p);
    CHECK(r.ops[0].sigma >= 1.0);
    CHECK(r.ops[0].sigma <= 2.0);
    CHECK(r.ops[3].quality >= p.jpeg_quality.first);
    CHECK(r.ops[3].quality <= p.jpeg_quality.second);
    CHECK(r.ops[2].noise_sigma >= p.noise_sigma.first);
    CHECK(r.ops[2].noise_sigma <= p.noise_sigma.second);
  }
}

TEST_CASE("indivisible dimensions are rejected with an explicit message") {
  core::Image img = testutil::make_texture_image(3, 10, 10);
  DegradeProfile p;  // scale 4
  DegradationRecipe r = sample_recipe(1, p);
  CHECK_THROWS_WITH_AS(apply_pipeline(img, r),
                       doctest::Contains("not divisible by scale"), std::invalid_argument);
}

TEST_CASE("inverted or invalid profile ranges are rejected") {
  DegradeProfile p;
  p.blur_sigma = {2.0, 1.0};
  CHECK_THROWS_AS(sample_recipe(0, p), std::invalid_argument);
  DegradeProfile q;
  q.jpeg_quality = {0, 90};
  CHECK_THROWS_AS(sample_recipe(0, q), std::invalid_argument);
}

TEST_CASE("outputs stay in [0,1] and obey the scale law across seeds") {
  core::Image img = testutil::make_texture_image(4, 32, 48);
  DegradeProfile p;
  p.noise_sigma = {0.1, 0.3};  // strong noise to stress clamping
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    DegradationRecipe r = sample_recipe(seed, p);
    core::Image out = apply_pipeline(img, r);
    CHECK(out.height() == img.height() / p.scale);
    CHECK(out.width() == img.width() / p.scale);
    CHECK(out.valid());
  }
}

TEST_CASE("recipe json round trip") {
  DegradeProfile p;
  DegradationRecipe r = sample_recipe(77, p);
  DegradationRecipe back = DegradationRecipe::from_json(r.to_json());
  CHECK(back.to_json().dump() == r.to_json().dump());
}
