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

#include <string>
#include <utility>
#include <vector>

#include "percep/core/image.hpp"
#include "percep/core/tensor.hpp"

namespace percep::evalkit {

// Minimal deterministic raster plotting (no external plotting dependency):
// enough for reward curves, score histograms and map overlays.

using Series = std::pair<std::string, std::vector<double>>;

/// Polyline chart of one or more series on a white canvas with axes and a
/// color legend strip (one swatch per series, in order).
core::Image line_chart(const std::vector<Series>& series, int width = 720, int height = 420);

/// Bar histogram of the values (fixed bin count over the data range).
core::Image histogram(const std::vector<Series>& value_sets, int bins = 24, int width = 720,
                      int height = 420);

/// Heatmap alpha-blended over the image: out = (1-a) * img + a * colormap(map).
core::Image overlay_map(const core::Image& img, const core::Tensor& map_hw, double alpha = 0.45);

}  // namespace percep::evalkit
