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

#include "percep/evalkit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace percep::evalkit {

using core::Image;
using core::Tensor;

namespace {

constexpr double kPalette[8][3] = {
    {0.12, 0.31, 0.85}, {0.90, 0.38, 0.09}, {0.13, 0.62, 0.24}, {0.75, 0.12, 0.55},
    {0.55, 0.42, 0.07}, {0.10, 0.62, 0.66}, {0.62, 0.11, 0.11}, {0.35, 0.35, 0.35},
};

void put_px(Image& img, int y, int x, const double rgb[3]) {
  if (y < 0 || y >= img.height() || x < 0 || x >= img.width()) return;
  for (int c = 0; c < 3; ++c) img.at(c, y, x) = rgb[c];
}

void draw_line(Image& img, int y0, int x0, int y1, int x1, const double rgb[3]) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (true) {
    put_px(img, y, x, rgb);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

void fill_rect(Image& img, int y0, int x0, int y1, int x1, const double rgb[3]) {
  for (int y = std::max(0, y0); y <= std::min(img.height() - 1, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(img.width() - 1, x1); ++x) put_px(img, y, x, rgb);
}

struct Frame {
  int top, left, bottom, right;
};

Frame draw_canvas(Image& img) {
  const double white[3] = {1, 1, 1};
  fill_rect(img, 0, 0, img.height() - 1, img.width() - 1, white);
  const double axis[3] = {0.15, 0.15, 0.15};
  Frame f{24, 40, img.height() - 28, img.width() - 14};
  draw_line(img, f.bottom, f.left, f.bottom, f.right, axis);
  draw_line(img, f.top, f.left, f.bottom, f.left, axis);
  return f;
}

void legend(Image& img, size_t n_series) {
  for (size_t s = 0; s < n_series; ++s) {
    const double* rgb = kPalette[s % 8];
    fill_rect(img, 6, 44 + static_cast<int>(s) * 26, 14, 60 + static_cast<int>(s) * 26, rgb);
  }
}

}  // namespace

Image line_chart(const std::vector<Series>& series, int width, int height) {
  Image img = Image::zeros(3, height, width);
  Frame f = draw_canvas(img);
  double lo = 0.0, hi = 1.0;
  size_t longest = 0;
  bool any = false;
  for (const auto& [name, ys] : series)
    for (double v : ys) {
      if (!any) {
        lo = hi = v;
        any = true;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  for (const auto& [name, ys] : series) longest = std::max(longest, ys.size());
  if (!any || longest < 2) return img;  // empty chart, axes only
  if (hi - lo < 1e-12) {
    hi += 0.5;
    lo -= 0.5;
  }

  for (size_t s = 0; s < series.size(); ++s) {
    const auto& ys = series[s].second;
    if (ys.size() < 2) continue;
    const double* rgb = kPalette[s % 8];
    int py = 0, px = 0;
    for (size_t i = 0; i < ys.size(); ++i) {
      const int x = f.left + static_cast<int>(std::lround(
                                 (f.right - f.left) * static_cast<double>(i) /
                                 static_cast<double>(longest - 1)));
      const int y = f.bottom - static_cast<int>(std::lround((f.bottom - f.top) * (ys[i] - lo) /
                                                            (hi - lo)));
      if (i) draw_line(img, py, px, y, x, rgb);
      py = y;
      px = x;
    }
  }
  legend(img, series.size());
  return img;
}

Image histogram(const std::vector<Series>& value_sets, int bins, int width, int height) {
  Image img = Image::zeros(3, height, width);
  Frame f = draw_canvas(img);
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const auto& [name, vs] : value_sets)
    for (double v : vs) {
      if (!any) {
        lo = hi = v;
        any = true;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!any) return img;
  if (hi - lo < 1e-12) {
    hi += 0.5;
    lo -= 0.5;
  }

  std::vector<std::vector<int>> counts(value_sets.size(), std::vector<int>(static_cast<size_t>(bins), 0));
  int peak = 1;
  for (size_t s = 0; s < value_sets.size(); ++s)
    for (double v : value_sets[s].second) {
      int b = static_cast<int>((v - lo) / (hi - lo) * bins);
      b = std::clamp(b, 0, bins - 1);
      peak = std::max(peak, ++counts[s][static_cast<size_t>(b)]);
    }

  const int band = std::max(1, (f.right - f.left) / bins);
  for (size_t s = 0; s < value_sets.size(); ++s) {
    const double* rgb = kPalette[s % 8];
    const int sub = std::max(1, band / static_cast<int>(value_sets.size()));
    for (int b = 0; b < bins; ++b) {
      const int c = counts[s][static_cast<size_t>(b)];
      if (!c) continue;
      const int x0 = f.left + b * band + static_cast<int>(s) * sub;
      const int y0 = f.bottom - static_cast<int>(std::lround(
                                    (f.bottom - f.top) * static_cast<double>(c) / peak));
      fill_rect(img, y0, x0, f.bottom - 1, x0 + sub - 1, rgb);
    }
  }
  legend(img, value_sets.size());
  return img;
}

Image overlay_map(const Image& img, const Tensor& map_hw, double alpha) {
  if (map_hw.rank() != 2 || map_hw.dim(0) != img.height() || map_hw.dim(1) != img.width())
    throw std::invalid_argument("overlay_map: map/image shape mismatch");
  Image out = Image::zeros(3, img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double v = std::clamp(map_hw.at(y, x), 0.0, 1.0);
      // Cold-to-hot ramp.
      const double heat[3] = {v, 0.25 * (1.0 - std::abs(2.0 * v - 1.0)), 1.0 - v};
      for (int c = 0; c < 3; ++c) {
        const double base = img.channels() == 3 ? img.at(c, y, x) : img.at(0, y, x);
        out.at(c, y, x) = (1.0 - alpha) * base + alpha * heat[c];
      }
    }
  return out;
}

}  // namespace percep::evalkit
