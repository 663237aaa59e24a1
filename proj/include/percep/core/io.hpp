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

#include <filesystem>
#include <string>

#include "percep/core/image.hpp"
#include "percep/core/tensor.hpp"

namespace percep::core {

/// Read an image file into [0,1] doubles. 8- and 16-bit inputs are scaled by
/// 1/255 and 1/65535; color files come back as 3-channel RGB, grayscale as 1.
Image read_image(const std::filesystem::path& path);

/// Lossless 16-bit PNG. Values are snapped to the k/65535 grid on write, so a
/// write/read round trip is exact for grid-aligned tensors.
void write_image_png16(const std::filesystem::path& path, const Image& img);

/// 8-bit PNG, for plots and overlays.
void write_image_png8(const std::filesystem::path& path, const Image& img);

/// Single-channel 16-bit PNG for degradation maps ([0,1] HW tensor).
void write_map_png16(const std::filesystem::path& path, const Tensor& hw);
Tensor read_map_png16(const std::filesystem::path& path);

void write_mask_png(const std::filesystem::path& path, const Mask& mask);
Mask read_mask_png(const std::filesystem::path& path);

/// Encode to JPEG at the given quality (1..100) and decode back: the real
/// lossy round trip used by the degradation pipeline. Input must be 3-channel.
Image jpeg_roundtrip(const Image& img, int quality);

}  // namespace percep::core
