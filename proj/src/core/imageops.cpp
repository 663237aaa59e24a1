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

#include "percep/core/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace percep::core {

std::vector<LinTap> bilinear_taps(int in_size, int out_size) {
  std::vector<LinTap> taps(static_cast<size_t>(out_size));
  const double scale = static_cast<double>(in_size) / out_size;
  for (int i = 0; i < out_size; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
    const int i0 = static_cast<int>(std::floor(src));
    const int i1 = std::min(i0 + 1, in_size - 1);
    taps[static_cast<size_t>(i)] = {i0, i1, src - i0};
  }
  return taps;
}

Tensor resize_bilinear(const Tensor& chw, int out_h, int out_w) {
  if (chw.rank() != 3) throw std::invalid_argument("resize_bilinear: expected CHW tensor");
  const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("resize_bilinear: bad output size");
  const auto ty = bilinear_taps(h, out_h);
  const auto tx = bilinear_taps(w, out_w);
  Tensor out({c, out_h, out_w});
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < out_h; ++y) {
      const auto& a = ty[static_cast<size_t>(y)];
      for (int x = 0; x < out_w; ++x) {
        const auto& b = tx[static_cast<size_t>(x)];
        const double v00 = chw.at(ci, a.i0, b.i0), v01 = chw.at(ci, a.i0, b.i1);
        const double v10 = chw.at(ci, a.i1, b.i0), v11 = chw.at(ci, a.i1, b.i1);
        out.at(ci, y, x) = (1 - a.w1) * ((1 - b.w1) * v00 + b.w1 * v01) +
                           a.w1 * ((1 - b.w1) * v10 + b.w1 * v11);
      }
    }
  return out;
}

Tensor resize_nearest(const Tensor& chw, int out_h, int out_w) {
  if (chw.rank() != 3) throw std::invalid_argument("resize_nearest: expected CHW tensor");
  const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("resize_nearest: bad output size");
  Tensor out({c, out_h, out_w});
  for (int y = 0; y < out_h; ++y) {
    int sy = static_cast<int>((y + 0.5) * h / out_h);
    sy = std::clamp(sy, 0, h - 1);
    for (int x = 0; x < out_w; ++x) {
      int sx = static_cast<int>((x + 0.5) * w / out_w);
      sx = std::clamp(sx, 0, w - 1);
      for (int ci = 0; ci < c; ++ci) out.at(ci, y, x) = chw.at(ci, sy, sx);
    }
  }
  return out;
}

namespace {

int reflect_index(int i, int n) {
  // Reflect without repeating the border sample (n >= 1).
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

}  // namespace

Tensor gaussian_blur(const Tensor& chw, double sigma) {
  if (chw.rank() != 3) throw std::invalid_argument("gaussian_blur: expected CHW tensor");
  if (sigma <= 0.0) return chw;
  const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<size_t>(i + r)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;

  Tensor tmp({c, h, w});
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i)
          acc += k[static_cast<size_t>(i + r)] * chw.at(ci, y, reflect_index(x + i, w));
        tmp.at(ci, y, x) = acc;
      }
  Tensor out({c, h, w});
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i)
          acc += k[static_cast<size_t>(i + r)] * tmp.at(ci, reflect_index(y + i, h), x);
        out.at(ci, y, x) = acc;
      }
  return out;
}

Tensor box_downsample(const Tensor& chw, int factor) {
  if (chw.rank() != 3) throw std::invalid_argument("box_downsample: expected CHW tensor");
  if (factor < 1) throw std::invalid_argument("box_downsample: factor must be >= 1");
  const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  if (h % factor != 0 || w % factor != 0)
    throw std::invalid_argument("box_downsample: " + std::to_string(h) + "x" + std::to_string(w) +
                                " not divisible by factor " + std::to_string(factor));
  const int oh = h / factor, ow = w / factor;
  const double inv = 1.0 / (factor * factor);
  Tensor out({c, oh, ow});
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) acc += chw.at(ci, y * factor + dy, x * factor + dx);
        out.at(ci, y, x) = acc * inv;
      }
  return out;
}

Tensor clamp01(Tensor chw) {
  for (std::int64_t i = 0; i < chw.numel(); ++i) chw[i] = std::clamp(chw[i], 0.0, 1.0);
  return chw;
}

Tensor quantize_u16_grid(Tensor chw) {
  for (std::int64_t i = 0; i < chw.numel(); ++i) {
    const double v = std::clamp(chw[i], 0.0, 1.0);
    chw[i] = std::round(v * 65535.0) / 65535.0;
  }
  return chw;
}

double min_value(const Tensor& t) {
  double m = t.numel() ? t[0] : 0.0;
  for (std::int64_t i = 1; i < t.numel(); ++i) m = std::min(m, t[i]);
  return m;
}

double max_value(const Tensor& t) {
  double m = t.numel() ? t[0] : 0.0;
  for (std::int64_t i = 1; i < t.numel(); ++i) m = std::max(m, t[i]);
  return m;
}

double mean_value(const Tensor& t) {
  if (!t.numel()) return 0.0;
  double s = 0.0;
  for (std::int64_t i = 0; i < t.numel(); ++i) s += t[i];
  return s / static_cast<double>(t.numel());
}

}  // namespace percep::core
