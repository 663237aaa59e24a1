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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percep/core/image.hpp"
#include "percep/core/rng.hpp"

namespace percep::degrade {

using core::Image;

// Seeded synthetic degradation pipeline: blur -> downsample -> noise -> jpeg,
// one pass. Produces the low-resolution inputs the restoration model upscales.

enum class DownFilter { box, bilinear };

DownFilter down_filter_from(const std::string& s);
const char* down_filter_name(DownFilter f);

struct DegradeOp {
  enum class Kind { blur, downsample, gaussian_noise, jpeg };
  Kind kind;
  double sigma = 0.0;              // blur
  int factor = 1;                  // downsample
  DownFilter filter = DownFilter::box;
  double noise_sigma = 0.0;        // gaussian_noise
  int quality = 90;                // jpeg

  nlohmann::ordered_json to_json() const;
  static DegradeOp from_json(const nlohmann::json& j);
};

/// Replaying the same recipe on the same image is bit-identical; the net
/// spatial reduction of the op list equals `scale`.
struct DegradationRecipe {
  std::uint64_t seed = 0;
  std::vector<DegradeOp> ops;
  int scale = 1;

  nlohmann::ordered_json to_json() const;
  static DegradationRecipe from_json(const nlohmann::json& j);
  void validate() const;
};

/// Parameter ranges the recipe sampler draws from.
struct DegradeProfile {
  int scale = 4;
  std::pair<double, double> blur_sigma{0.8, 2.4};
  DownFilter down_filter = DownFilter::box;
  std::pair<double, double> noise_sigma{0.0, 0.04};
  std::pair<int, int> jpeg_quality{55, 95};
  bool use_jpeg = true;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static DegradeProfile from_json(const nlohmann::json& j);
};

/// Draw a recipe with every parameter inside the profile ranges.
/// Deterministic in `seed`.
DegradationRecipe sample_recipe(std::uint64_t seed, const DegradeProfile& profile);

/// Run the op chain. Output dims = input dims / recipe.scale; values stay in
/// [0,1]. Rejects inputs whose dimensions are not divisible by the scale.
Image apply_pipeline(const Image& img, const DegradationRecipe& recipe);

}  // namespace percep::degrade
