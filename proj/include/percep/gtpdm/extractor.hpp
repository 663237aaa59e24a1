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
#include <memory>
#include <string>

#include "percep/core/image.hpp"
#include "percep/core/tensor.hpp"

namespace percep::gtpdm {

/// Deep features on the image grid downscaled by `stride`.
struct FeatureMap {
  core::Tensor grid;  // [D, h', w'] with h' = ceil(H/stride)
  std::string extractor_id;
  int stride = 1;
};

/// Pluggable deep-feature source for feature-level dissimilarity. Extraction
/// is a pure function of (weights, image): safe for concurrent read-only use.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual FeatureMap extract(const core::Image& img) const = 0;
  virtual std::string id() const = 0;
  virtual int stride() const = 0;
  /// Receptive field diameter in input pixels: a feature cell is unaffected
  /// by pixels farther than receptive_field()/2 from its center.
  virtual int receptive_field() const = 0;
  virtual void save(const std::filesystem::path& path) const = 0;
};

/// Fixed-random multi-scale convolutional projector: three stride-2 conv
/// layers with SiLU between them, weights drawn from a seeded stream. Fully
/// offline stand-in for a pretrained backbone. stride = 8, receptive field 15.
std::unique_ptr<FeatureExtractor> make_random_projector(std::uint64_t seed, int dim);

/// Extractor backed by a weights file in the shared checkpoint format, so an
/// externally trained backbone with the same layer layout can be dropped in.
std::unique_ptr<FeatureExtractor> load_file_extractor(const std::filesystem::path& path);

}  // namespace percep::gtpdm
