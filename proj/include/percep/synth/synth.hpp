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
#include <filesystem>
#include <utility>

#include <nlohmann/json.hpp>

#include "percep/core/image.hpp"
#include "percep/core/rng.hpp"

namespace percep::synth {

using core::Image;
using core::Mask;

// Swap-mask generation and distorted-sample composition. A sample implants
// local defects by pasting restored-output regions into the clean image under
// a hard binary mask; the mask is the exact ground truth of where.

/// Single axis-aligned rectangle of ones. The sampler enumerates all
/// rectangle sizes whose coverage lies within frac_range, draws one size
/// uniformly, then draws the top-left corner uniformly; tests replay the same
/// procedure. Rejects ranges no rectangle on the grid can satisfy.
Mask gen_rect_mask(int h, int w, std::uint64_t seed, std::pair<double, double> frac_range);

/// Brush model for free-form masks: each stroke is a random walk of circular
/// stamps. Per stroke the sampler draws radius, step count, start point and a
/// heading that turns by at most max_turn per step; every step stamps a
/// filled circle of the stroke radius.
struct FreeformParams {
  std::pair<int, int> strokes{1, 3};
  std::pair<int, int> radius{2, 5};
  std::pair<int, int> steps{4, 16};
  double step_scale = 1.5;    // step length = step_scale * radius
  double max_turn = 0.7854;   // radians per step
  std::pair<double, double> coverage{0.05, 0.35};
  int retry_limit = 25;

  nlohmann::ordered_json to_json() const;
  static FreeformParams from_json(const nlohmann::json& j);
};

/// Union of random strokes, binarized, resampled until coverage lands inside
/// params.coverage (up to retry_limit; then an error naming the bound).
Mask gen_freeform_mask(int h, int w, std::uint64_t seed, const FreeformParams& params);

/// Load a single-channel mask file, nearest-neighbor resize to the target
/// size, threshold at 0.5. Rejects unreadable files and zero-area masks.
Mask load_semantic_mask(const std::filesystem::path& path, int target_h, int target_w);

/// out = mask * sr + (1 - mask) * gt per channel. Every output pixel equals
/// exactly one of the inputs.
Image region_swap(const Image& gt, const Image& sr, const Mask& mask);

}  // namespace percep::synth
