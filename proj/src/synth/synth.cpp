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

#include "percep/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "percep/core/imageops.hpp"
#include "percep/core/io.hpp"

namespace percep::synth {

Mask gen_rect_mask(int h, int w, std::uint64_t seed, std::pair<double, double> frac_range) {
  if (h < 1 || w < 1) throw std::invalid_argument("gen_rect_mask: bad grid size");
  const auto [flo, fhi] = frac_range;
  if (!(flo > 0.0 && flo <= fhi && fhi <= 1.0))
    throw std::invalid_argument("gen_rect_mask: coverage range must satisfy 0 < lo <= hi <= 1");

  // Enumerate all feasible sizes in row-major (rh, rw) order.
  const double total = static_cast<double>(h) * w;
  std::vector<std::pair<int, int>> sizes;
  for (int rh = 1; rh <= h; ++rh)
    for (int rw = 1; rw <= w; ++rw) {
      const double c = rh * rw / total;
      if (c >= flo && c <= fhi) sizes.emplace_back(rh, rw);
    }
  if (sizes.empty())
    throw std::invalid_argument("gen_rect_mask: coverage range [" + std::to_string(flo) + "," +
                                std::to_string(fhi) + "] unachievable on " + std::to_string(h) +
                                "x" + std::to_string(w) + " grid");

  core::Rng rng(core::mix_seed(seed, "rect_mask"));
  const auto [rh, rw] = sizes[static_cast<size_t>(rng.uniform_int(static_cast<std::int64_t>(sizes.size())))];
  const int y0 = static_cast<int>(rng.uniform_int(h - rh + 1));
  const int x0 = static_cast<int>(rng.uniform_int(w - rw + 1));

  Mask m(h, w, core::MaskKind::rect);
  for (int y = y0; y < y0 + rh; ++y)
    for (int x = x0; x < x0 + rw; ++x) m.at(y, x) = 1;
  return m;
}

namespace {

void stamp_circle(Mask& m, double cy, double cx, double r) {
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int y1 = std::min(m.h - 1, static_cast<int>(std::ceil(cy + r)));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int x1 = std::min(m.w - 1, static_cast<int>(std::ceil(cx + r)));
  const double r2 = r * r;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dy = y - cy, dx = x - cx;
      if (dy * dy + dx * dx <= r2) m.at(y, x) = 1;
    }
}

Mask draw_freeform(int h, int w, core::Rng& rng, const FreeformParams& p) {
  Mask m(h, w, core::MaskKind::freeform);
  const int n_strokes = static_cast<int>(rng.uniform_int(p.strokes.first, p.strokes.second));
  for (int s = 0; s < n_strokes; ++s) {
    const double r = static_cast<double>(rng.uniform_int(p.radius.first, p.radius.second));
    const int n_steps = static_cast<int>(rng.uniform_int(p.steps.first, p.steps.second));
    double cy = rng.uniform(0.0, static_cast<double>(h));
    double cx = rng.uniform(0.0, static_cast<double>(w));
    double heading = rng.uniform(0.0, 6.283185307179586);
    stamp_circle(m, cy, cx, r);
    for (int i = 0; i < n_steps; ++i) {
      heading += rng.uniform(-p.max_turn, p.max_turn);
      cy += p.step_scale * r * std::sin(heading);
      cx += p.step_scale * r * std::cos(heading);
      cy = std::clamp(cy, 0.0, static_cast<double>(h - 1));
      cx = std::clamp(cx, 0.0, static_cast<double>(w - 1));
      stamp_circle(m, cy, cx, r);
    }
  }
  return m;
}

}  // namespace

nlohmann::ordered_json FreeformParams::to_json() const {
  nlohmann::ordered_json j;
  j["strokes"] = {strokes.first, strokes.second};
  j["radius"] = {radius.first, radius.second};
  j["steps"] = {steps.first, steps.second};
  j["step_scale"] = step_scale;
  j["max_turn"] = max_turn;
  j["coverage"] = {coverage.first, coverage.second};
  j["retry_limit"] = retry_limit;
  return j;
}

FreeformParams FreeformParams::from_json(const nlohmann::json& j) {
  FreeformParams p;
  auto pair_i = [&](const char* k, std::pair<int, int>& dst) {
    if (j.contains(k)) dst = {j[k][0].get<int>(), j[k][1].get<int>()};
  };
  auto pair_d = [&](const char* k, std::pair<double, double>& dst) {
    if (j.contains(k)) dst = {j[k][0].get<double>(), j[k][1].get<double>()};
  };
  pair_i("strokes", p.strokes);
  pair_i("radius", p.radius);
  pair_i("steps", p.steps);
  p.step_scale = j.value("step_scale", p.step_scale);
  p.max_turn = j.value("max_turn", p.max_turn);
  pair_d("coverage", p.coverage);
  p.retry_limit = j.value("retry_limit", p.retry_limit);
  return p;
}

Mask gen_freeform_mask(int h, int w, std::uint64_t seed, const FreeformParams& params) {
  if (h < 1 || w < 1) throw std::invalid_argument("gen_freeform_mask: bad grid size");
  if (params.strokes.first > params.strokes.second || params.radius.first > params.radius.second ||
      params.steps.first > params.steps.second || params.radius.first < 1)
    throw std::invalid_argument("gen_freeform_mask: invalid parameter ranges");
  core::Rng rng(core::mix_seed(seed, "freeform_mask"));
  const auto [clo, chi] = params.coverage;
  for (int attempt = 0; attempt < params.retry_limit; ++attempt) {
    Mask m = draw_freeform(h, w, rng, params);
    const double c = m.coverage();
    if (c >= clo && c <= chi) return m;
  }
  throw std::runtime_error("gen_freeform_mask: coverage bound [" + std::to_string(clo) + "," +
                           std::to_string(chi) + "] not met after " +
                           std::to_string(params.retry_limit) + " attempts on " +
                           std::to_string(h) + "x" + std::to_string(w) + " grid");
}

Mask load_semantic_mask(const std::filesystem::path& path, int target_h, int target_w) {
  if (target_h < 1 || target_w < 1) throw std::invalid_argument("load_semantic_mask: bad target size");
  core::Image img = core::read_image(path);
  if (img.channels() != 1)
    throw std::runtime_error("load_semantic_mask: expected single-channel file: " + path.string());
  core::Tensor resized = core::resize_nearest(img.chw, target_h, target_w);
  Mask m(target_h, target_w, core::MaskKind::semantic);
  for (int y = 0; y < target_h; ++y)
    for (int x = 0; x < target_w; ++x) m.at(y, x) = resized.at(0, y, x) >= 0.5 ? 1 : 0;
  if (m.ones() == 0)
    throw std::runtime_error("load_semantic_mask: zero-area mask: " + path.string());
  return m;
}

Image region_swap(const Image& gt, const Image& sr, const Mask& mask) {
  if (gt.channels() != sr.channels() || gt.height() != sr.height() || gt.width() != sr.width())
    throw std::invalid_argument("region_swap: gt/sr shape mismatch");
  if (mask.h != gt.height() || mask.w != gt.width())
    throw std::invalid_argument("region_swap: mask shape mismatch");
  Image out = gt;
  for (int c = 0; c < gt.channels(); ++c)
    for (int y = 0; y < mask.h; ++y)
      for (int x = 0; x < mask.w; ++x)
        if (mask.at(y, x)) out.at(c, y, x) = sr.at(c, y, x);
  return out;
}

}  // namespace percep::synth
