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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "percep/core/tensor.hpp"

namespace percep::core {

/// Dense pixel grid, CHW layout, values in [0,1]. C is 3 (RGB) or 1 (maps).
struct Image {
  Tensor chw;

  Image() = default;
  explicit Image(Tensor t) : chw(std::move(t)) {}

  static Image zeros(int c, int h, int w) { return Image(Tensor::zeros({c, h, w})); }
  static Image solid(int c, int h, int w, double v) { return Image(Tensor::full({c, h, w}, v)); }

  int channels() const { return chw.dim(0); }
  int height() const { return chw.dim(1); }
  int width() const { return chw.dim(2); }

  double& at(int c, int y, int x) { return chw.at(c, y, x); }
  double at(int c, int y, int x) const { return chw.at(c, y, x); }

  bool valid() const {
    if (chw.rank() != 3) return false;
    if (channels() != 1 && channels() != 3) return false;
    if (height() < 1 || width() < 1) return false;
    for (std::int64_t i = 0; i < chw.numel(); ++i)
      if (!(chw[i] >= 0.0 && chw[i] <= 1.0)) return false;
    return true;
  }

  void check_valid(const std::string& what) const {
    if (!valid()) throw std::invalid_argument(what + ": invalid image (shape or range)");
  }
};

enum class MaskKind { rect, freeform, semantic };

inline const char* mask_kind_name(MaskKind k) {
  switch (k) {
    case MaskKind::rect: return "rect";
    case MaskKind::freeform: return "freeform";
    case MaskKind::semantic: return "semantic";
  }
  return "?";
}

inline MaskKind mask_kind_from(const std::string& s) {
  if (s == "rect") return MaskKind::rect;
  if (s == "freeform") return MaskKind::freeform;
  if (s == "semantic") return MaskKind::semantic;
  throw std::invalid_argument("unknown mask kind: " + s);
}

/// Binary H×W selection grid.
struct Mask {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> grid;  // strictly 0/1, row-major
  MaskKind kind = MaskKind::rect;

  Mask() = default;
  Mask(int h_, int w_, MaskKind k) : h(h_), w(w_), grid(static_cast<size_t>(h_) * w_, 0), kind(k) {}

  std::uint8_t& at(int y, int x) { return grid[static_cast<size_t>(y) * w + x]; }
  std::uint8_t at(int y, int x) const { return grid[static_cast<size_t>(y) * w + x]; }

  std::int64_t ones() const {
    std::int64_t n = 0;
    for (auto v : grid) n += v;
    return n;
  }

  double coverage() const {
    return grid.empty() ? 0.0 : static_cast<double>(ones()) / static_cast<double>(grid.size());
  }

  bool binary() const {
    for (auto v : grid)
      if (v != 0 && v != 1) return false;
    return true;
  }
};

}  // namespace percep::core
