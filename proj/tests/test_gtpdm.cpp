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

#include "percep/core/imageops.hpp"
#include "percep/gtpdm/gtpdm.hpp"
#include "percep/synth/synth.hpp"
#include "testutil.hpp"

using namespace percep;
using namespace percep::gtpdm;

namespace {

FeatureMap make_fm(core::Tensor grid, const std::string& id = "test") {
  FeatureMap fm;
  fm.grid = std::move(grid);
  fm.extractor_id = id;
  fm.stride = 8;
  return fm;
}

// Straightforward loop reimplementation of fuse (upsample + blend + min-max),
// kept independent of the library path it checks.
core::Tensor fuse_oracle(const core::Tensor& dp, const core::Tensor& df, double alpha) {
  const int h = dp.dim(0), w = dp.dim(1);
  const int fh = df.dim(0), fw = df.dim(1);
  core::Tensor out({h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sy = (y + 0.5) * fh / h - 0.5;
      double sx = (x + 0.5) * fw / w - 0.5;
      sy = std::min(std::max(sy, 0.0), static_cast<double>(fh - 1));
      sx = std::min(std::max(sx, 0.0), static_cast<double>(fw - 1));
      const int y0 = static_cast<int>(std::floor(sy)), x0 = static_cast<int>(std::floor(sx));
      const int y1 = std::min(y0 + 1, fh - 1), x1 = std::min(x0 + 1, fw - 1);
      const double wy = sy - y0, wx = sx - x0;
      const double up = (1 - wy) * ((1 - wx) * df.at(y0, x0) + wx * df.at(y0, x1)) +
                        wy * ((1 - wx) * df.at(y1, x0) + wx * df.at(y1, x1));
      out.at(y, x) = alpha * dp.at(y, x) + (1 - alpha) * up;
    }
  double lo = out[0], hi = out[0];
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    lo = std::min(lo, out[i]);
    hi = std::max(hi, out[i]);
  }
  if (hi - lo < 1e-12) {
    for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = 0.0;
  } else {
    for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = (out[i] - lo) / (hi - lo);
  }
  return out;
}

}  // namespace

TEST_CASE("pixel diff: identity gives zeros, inversion gives ones") {
  core::Image gt = core::Image::zeros(3, 4, 4);
  core::Tensor z = pixel_diff(gt, gt);
  for (std::int64_t i = 0; i < z.numel(); ++i) CHECK(z[i] == 0.0);

  core::Image inv = core::Image::solid(3, 4, 4, 1.0);
  core::Tensor o = pixel_diff(inv, gt);
  for (std::int64_t i = 0; i < o.numel(); ++i) CHECK(o[i] == 1.0);
}

TEST_CASE("pixel diff matches the per-pixel loop oracle") {
  core::Image a = testutil::make_texture_image(1, 3, 3);
  core::Image b = testutil::make_texture_image(2, 3, 3);
  core::Tensor d = pixel_diff(a, b);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) {
      double acc = 0;
      for (int c = 0; c < 3; ++c) acc += std::abs(a.at(c, y, x) - b.at(c, y, x));
      CHECK(std::abs(d.at(y, x) - acc / 3.0) < 1e-12);
    }
  CHECK_THROWS_AS(pixel_diff(a, testutil::make_texture_image(3, 4, 3)), std::invalid_argument);
}

TEST_CASE("feature diff hits 0 / 1 / 2 at aligned, orthogonal, opposite vectors") {
  core::Tensor a({2, 1, 3});
  core::Tensor b({2, 1, 3});
  // location 0: identical; location 1: orthogonal; location 2: anti-parallel
  a.at(0, 0, 0) = 1.0; a.at(1, 0, 0) = 2.0;
  b.at(0, 0, 0) = 1.0; b.at(1, 0, 0) = 2.0;
  a.at(0, 0, 1) = 1.0; a.at(1, 0, 1) = 0.0;
  b.at(0, 0, 1) = 0.0; b.at(1, 0, 1) = 3.0;
  a.at(0, 0, 2) = 0.5; a.at(1, 0, 2) = -1.0;
  b.at(0, 0, 2) = -0.5; b.at(1, 0, 2) = 1.0;
  core::Tensor d = feat_diff(make_fm(a), make_fm(b));
  CHECK(d.at(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.at(0, 2) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("feature diff: near-zero vectors give 0; mismatches are rejected") {
  core::Tensor a({2, 1, 1});
  core::Tensor b({2, 1, 1});
  b.at(0, 0, 0) = 1.0;
  CHECK(feat_diff(make_fm(a), make_fm(b)).at(0, 0) == 0.0);
  CHECK_THROWS_AS(feat_diff(make_fm(a, "x"), make_fm(b, "y")), std::invalid_argument);
  core::Tensor c({2, 2, 1});
  CHECK_THROWS_AS(feat_diff(make_fm(a), make_fm(c)), std::invalid_argument);
}

TEST_CASE("fuse at alpha=1 is min-max normalized pixel diff, feature term ignored") {
  core::Rng r(5);
  core::Tensor dp({6, 6});
  for (std::int64_t i = 0; i < dp.numel(); ++i) dp[i] = r.uniform();
  core::Tensor df = core::Tensor::full({2, 2}, 123.0);  // would dominate if not ignored
  GroundTruthPdm pdm = fuse(dp, df, 1.0);
  const double lo = core::min_value(dp), hi = core::max_value(dp);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x)
      CHECK(pdm.grid.at(y, x) == doctest::Approx((dp.at(y, x) - lo) / (hi - lo)).epsilon(1e-12));
}

TEST_CASE("fuse of two zero maps is the all-zeros map") {
  GroundTruthPdm pdm = fuse(core::Tensor::zeros({8, 8}), core::Tensor::zeros({2, 2}), 0.5);
  for (std::int64_t i = 0; i < pdm.grid.numel(); ++i) CHECK(pdm.grid[i] == 0.0);
}

TEST_CASE("fuse matches an independent reimplementation to 1e-9") {
  core::Rng r(9);
  for (int rep = 0; rep < 50; ++rep) {
    const int h = 4 + static_cast<int>(r.uniform_int(13));
    const int w = 4 + static_cast<int>(r.uniform_int(13));
    const int fh = 1 + static_cast<int>(r.uniform_int(4));
    const int fw = 1 + static_cast<int>(r.uniform_int(4));
    core::Tensor dp({h, w});
    core::Tensor df({fh, fw});
    for (std::int64_t i = 0; i < dp.numel(); ++i) dp[i] = r.uniform();
    for (std::int64_t i = 0; i < df.numel(); ++i) df[i] = r.uniform(0.0, 2.0);
    const double alpha = r.uniform();
    GroundTruthPdm pdm = fuse(dp, df, alpha);
    core::Tensor want = fuse_oracle(dp, df, alpha);
    for (std::int64_t i = 0; i < want.numel(); ++i) CHECK(std::abs(pdm.grid[i] - want[i]) < 1e-9);
  }
}

TEST_CASE("fused map spans [0,1] and attains 1 when non-constant") {
  core::Rng r(13);
  core::Tensor dp({8, 8});
  for (std::int64_t i = 0; i < dp.numel(); ++i) dp[i] = r.uniform();
  core::Tensor df({2, 2});
  for (std::int64_t i = 0; i < df.numel(); ++i) df[i] = r.uniform(0.0, 2.0);
  GroundTruthPdm pdm = fuse(dp, df, 0.5);
  CHECK(core::min_value(pdm.grid) == 0.0);
  CHECK(core::max_value(pdm.grid) == 1.0);
}

TEST_CASE("pre-normalization blend is increasing in alpha where pixel diff dominates") {
  core::Tensor dp = core::Tensor::full({4, 4}, 0.0);
  core::Tensor df = core::Tensor::full({2, 2}, 0.0);
  dp.at(1, 1) = 0.9;
  df.at(0, 0) = 0.2;
  double prev = -1.0;
  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    // Raw blend before min-max: monotone in alpha at the probed pixel.
    const double v = fuse_raw(dp, df, alpha).at(1, 1);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("random projector: shapes, determinism, and file round trip") {
  testutil::ScopedTempDir tmp("ext");
  auto ext = make_random_projector(0xABCD, 24);
  CHECK(ext->stride() == 8);
  core::Image img = testutil::make_texture_image(21, 40, 56);
  FeatureMap f1 = ext->extract(img);
  CHECK(f1.grid.dim(0) == 24);
  CHECK(f1.grid.dim(1) == (40 + 7) / 8);
  CHECK(f1.grid.dim(2) == (56 + 7) / 8);

  // Odd sizes: h' = ceil(H / stride).
  core::Image odd = testutil::make_texture_image(22, 33, 17);
  FeatureMap f_odd = ext->extract(odd);
  CHECK(f_odd.grid.dim(1) == 5);
  CHECK(f_odd.grid.dim(2) == 3);

  FeatureMap f2 = ext->extract(img);
  for (std::int64_t i = 0; i < f1.grid.numel(); ++i) CHECK(f1.grid[i] == f2.grid[i]);

  auto ext2 = make_random_projector(0xABCE, 24);
  CHECK(ext->id() != ext2->id());

  const auto p = tmp.path() / "ext.ckpt";
  ext->save(p);
  auto loaded = load_file_extractor(p);
  FeatureMap f3 = loaded->extract(img);
  REQUIRE(f3.grid.same_shape(f1.grid));
  for (std::int64_t i = 0; i < f1.grid.numel(); ++i) CHECK(f3.grid[i] == f1.grid[i]);
  CHECK(loaded->id() != ext->id());  // identity tracks the file content
}

TEST_CASE("gt map is exactly zero outside the mask's receptive-field dilation") {
  auto ext = make_random_projector(77, 16);
  const int h = 64, w = 64;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    core::Image gt = testutil::make_texture_image(40 + seed, h, w);
    core::Image sr = testutil::make_texture_image(90 + seed, h, w);
    core::Mask mask = synth::gen_rect_mask(h, w, seed, {0.02, 0.1});
    core::Image syn = synth::region_swap(gt, sr, mask);
    GroundTruthPdm pdm = build_gt_pdm(syn, gt, *ext, 0.5);

    // Feature cell (fy, fx) sees input rows [8fy-7, 8fy+7] and similarly for
    // columns (three 3x3 stride-2 convs with pad 1). A pixel can be nonzero
    // only if it is inside the mask or one of its four bilinear taps reads a
    // cell whose window intersects the mask.
    const int fh2 = (h + 7) / 8, fw2 = (w + 7) / 8;
    std::vector<std::uint8_t> sees(static_cast<size_t>(fh2) * fw2, 0);
    for (int fy = 0; fy < fh2; ++fy)
      for (int fx = 0; fx < fw2; ++fx) {
        bool hit = false;
        for (int y = std::max(0, 8 * fy - 7); y <= std::min(h - 1, 8 * fy + 7) && !hit; ++y)
          for (int x = std::max(0, 8 * fx - 7); x <= std::min(w - 1, 8 * fx + 7) && !hit; ++x)
            hit = mask.at(y, x) != 0;
        sees[static_cast<size_t>(fy) * fw2 + fx] = hit ? 1 : 0;
      }
    const auto ty = core::bilinear_taps(fh2, h);
    const auto tx = core::bilinear_taps(fw2, w);
    int checked = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (mask.at(y, x)) continue;
        const auto& a = ty[static_cast<size_t>(y)];
        const auto& b = tx[static_cast<size_t>(x)];
        bool influenced = false;
        for (int iy : {a.i0, a.i1})
          for (int ix : {b.i0, b.i1}) {
            const double wgt = (iy == a.i0 ? 1 - a.w1 : a.w1) * (ix == b.i0 ? 1 - b.w1 : b.w1);
            if (wgt > 0 && sees[static_cast<size_t>(iy) * fw2 + ix]) influenced = true;
          }
        if (!influenced) {
          CHECK(pdm.grid.at(y, x) == 0.0);
          ++checked;
        }
      }
    CHECK(checked > 0);
  }
}
