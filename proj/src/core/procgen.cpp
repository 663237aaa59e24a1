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

#include "percep/core/procgen.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "percep/core/imageops.hpp"
#include "percep/core/rng.hpp"

namespace percep::core {

Image make_texture_image(std::uint64_t seed, int h, int w) {
  Rng rng(mix_seed(seed, "texture"));
  Image img = Image::zeros(3, h, w);

  for (int c = 0; c < 3; ++c) {
    const double gx = rng.uniform(-0.3, 0.3), gy = rng.uniform(-0.3, 0.3);
    const double base = rng.uniform(0.35, 0.65);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.at(c, y, x) = base + gx * (static_cast<double>(x) / w - 0.5) +
                          gy * (static_cast<double>(y) / h - 0.5);
  }

  for (int cell : {4, 8, 16}) {
    const int gh = (h + cell - 1) / cell + 1, gw = (w + cell - 1) / cell + 1;
    Tensor grid({1, gh, gw});
    for (std::int64_t i = 0; i < grid.numel(); ++i) grid[i] = rng.uniform(-1.0, 1.0);
    Tensor up = resize_bilinear(grid, h, w);
    for (int c = 0; c < 3; ++c) {
      const double gain = rng.uniform(0.05, 0.16);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(c, y, x) += gain * up.at(0, y, x);
    }
  }

  const int n_shapes = 2 + static_cast<int>(rng.uniform_int(3));
  for (int s = 0; s < n_shapes; ++s) {
    const double cy = rng.uniform(0.0, h), cx = rng.uniform(0.0, w);
    const double ry = rng.uniform(h / 10.0, h / 3.0), rx = rng.uniform(w / 10.0, w / 3.0);
    const double col[3] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    const double mixv = rng.uniform(0.5, 0.9);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dy = (y - cy) / ry, dx = (x - cx) / rx;
        if (dy * dy + dx * dx <= 1.0)
          for (int c = 0; c < 3; ++c)
            img.at(c, y, x) = (1 - mixv) * img.at(c, y, x) + mixv * col[c];
      }
  }

  for (std::int64_t i = 0; i < img.chw.numel(); ++i)
    img.chw[i] = std::min(0.98, std::max(0.02, img.chw[i]));
  return img;
}

Mask make_blob_mask(std::uint64_t seed, int h, int w, std::pair<double, double> coverage) {
  Rng rng(mix_seed(seed, "blob_mask"));
  const int cell = std::max(4, std::min(h, w) / 6);
  const int gh = (h + cell - 1) / cell + 1, gw = (w + cell - 1) / cell + 1;
  Tensor grid({1, gh, gw});
  for (std::int64_t i = 0; i < grid.numel(); ++i) grid[i] = rng.uniform(0.0, 1.0);
  Tensor field = resize_bilinear(grid, h, w);

  const double target = rng.uniform(coverage.first, coverage.second);
  std::vector<double> sorted(field.data(), field.data() + field.numel());
  std::sort(sorted.begin(), sorted.end());
  const auto cut = static_cast<size_t>(
      std::clamp((1.0 - target) * static_cast<double>(sorted.size()), 0.0,
                 static_cast<double>(sorted.size() - 1)));
  const double thr = sorted[cut];

  Mask m(h, w, MaskKind::semantic);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.at(y, x) = field.at(0, y, x) > thr ? 1 : 0;
  if (m.ones() == 0) m.at(h / 2, w / 2) = 1;
  return m;
}

}  // namespace percep::core
