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

#include <vector>

#include "percep/core/tensor.hpp"

namespace percep::core {

/// One axis of a bilinear resample: output index i reads input indices i0,i1
/// with weights (1-w1), w1. Half-pixel-center convention:
///   src = (dst + 0.5) * in/out - 0.5, clamped to the valid range.
struct LinTap {
  int i0;
  int i1;
  double w1;
};

std::vector<LinTap> bilinear_taps(int in_size, int out_size);

/// Bilinear resample of a CHW tensor (works for both up- and downscaling;
/// downscaling uses plain 2-tap interpolation, not area averaging).
Tensor resize_bilinear(const Tensor& chw, int out_h, int out_w);

/// Nearest-neighbor resample (src index = floor((dst + 0.5) * in/out)).
Tensor resize_nearest(const Tensor& chw, int out_h, int out_w);

/// Separable Gaussian blur with reflect padding; kernel radius = ceil(3*sigma).
/// sigma <= 0 returns the input unchanged.
Tensor gaussian_blur(const Tensor& chw, double sigma);

/// Exact box (area) downsample by an integer factor; dims must divide.
Tensor box_downsample(const Tensor& chw, int factor);

Tensor clamp01(Tensor chw);

/// Snap values to the k/65535 grid used by 16-bit image files.
Tensor quantize_u16_grid(Tensor chw);

double min_value(const Tensor& t);
double max_value(const Tensor& t);
double mean_value(const Tensor& t);

}  // namespace percep::core
