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

#include "percep/core/image.hpp"

namespace percep::core {

/// Procedural photo stand-in: layered value noise, a global gradient and a
/// few solid ellipses. Smooth areas, texture and edges; values in (0,1).
Image make_texture_image(std::uint64_t seed, int h, int w);

/// Blob-shaped binary mask: smooth value noise thresholded at the quantile
/// that lands coverage inside the given range (seeded target).
Mask make_blob_mask(std::uint64_t seed, int h, int w, std::pair<double, double> coverage);

}  // namespace percep::core
