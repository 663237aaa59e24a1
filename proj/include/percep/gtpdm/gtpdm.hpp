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

#include <nlohmann/json.hpp>

#include "percep/core/image.hpp"
#include "percep/core/tensor.hpp"
#include "percep/gtpdm/extractor.hpp"

namespace percep::gtpdm {

using core::Image;
using core::Tensor;

// Ground-truth perceptual degradation maps: a weighted fusion of pixel-level
// and feature-level dissimilarity, min-max normalized per image.

struct MapStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  nlohmann::ordered_json to_json() const;
};

struct GroundTruthPdm {
  Tensor grid;  // [H, W] in [0,1]
  double alpha = 0.5;
  MapStats pixel_stats;
  MapStats feat_stats;
};

/// Per-pixel mean over channels of |syn - gt|; range [0,1].
Tensor pixel_diff(const Image& syn, const Image& gt);

/// Per-location cosine distance (1 - cos) of the D-dim feature vectors;
/// range [0,2]. Locations where either vector has norm < 1e-12 give 0.
/// Rejects shape or extractor mismatches.
Tensor feat_diff(const FeatureMap& f_syn, const FeatureMap& f_gt);

/// Pre-normalization blend: alpha * diff_pixel + (1 - alpha) * up(diff_feat),
/// with diff_feat bilinearly upsampled to the pixel grid.
Tensor fuse_raw(const Tensor& diff_pixel, const Tensor& diff_feat, double alpha);

/// fuse_raw followed by per-image min-max to [0,1]. A constant fused map
/// (max - min < 1e-12) collapses to all zeros, so clean samples get
/// exactly-zero targets.
GroundTruthPdm fuse(const Tensor& diff_pixel, const Tensor& diff_feat, double alpha);

/// Full path: extract features of syn and gt, fuse with pixel diff.
GroundTruthPdm build_gt_pdm(const Image& syn, const Image& gt, const FeatureExtractor& extractor,
                            double alpha);

}  // namespace percep::gtpdm
