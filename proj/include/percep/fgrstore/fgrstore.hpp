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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percep/core/image.hpp"
#include "percep/degrade/degrade.hpp"
#include "percep/gtpdm/extractor.hpp"
#include "percep/gtpdm/gtpdm.hpp"
#include "percep/refl/generator.hpp"
#include "percep/synth/synth.hpp"

namespace percep::fgrstore {

namespace fs = std::filesystem;
using core::Image;
using core::Mask;

// Fine-grained reward dataset: every record is (gt, sr, syn, mask, gt map,
// recipe). Samples are fully regenerable from the global seed plus the stored
// recipe/mask metadata; images are stored as lossless 16-bit PNG on the
// k/65535 grid, so write-then-read is bit exact.

/// One supplier of restored (artifact-laden) images for the dataset build.
class SrSource {
 public:
  virtual ~SrSource() = default;
  /// SR image at GT resolution, on the u16 grid.
  virtual Image make_sr(const Image& gt, const Image& lr, const std::string& stem) const = 0;
  virtual std::string id() const = 0;
};

/// Pool entry backed by a toy generator (optionally pretrained on plain
/// reconstruction during the build, the stand-in for real restoration
/// model outputs).
std::unique_ptr<SrSource> make_generator_source(refl::ToyGenerator gen);
/// Pool entry reading precomputed SR images from <dir>/<stem>.png.
std::unique_ptr<SrSource> make_directory_source(const fs::path& dir);

struct MaskMixture {
  double rect = 0.4;
  double freeform = 0.3;
  double semantic = 0.3;
  void validate() const;
};

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  void validate() const;
};

struct PoolGeneratorSpec {
  std::uint64_t seed = 1;
  int width = 32;
  int blocks = 4;
  int pretrain_steps = 300;
  double pretrain_lr = 2e-3;
};

struct BuildConfig {
  int n_samples = 500;
  int image_size = 64;
  double alpha = 0.5;
  MaskMixture mixture;
  std::pair<double, double> coverage{0.05, 0.35};
  synth::FreeformParams freeform;
  degrade::DegradeProfile degrade;
  SplitSpec splits;
  std::vector<PoolGeneratorSpec> pool_generators{{}};
  std::vector<fs::path> sr_dirs;  // optional precomputed SR directories
  int workers = 1;

  nlohmann::ordered_json to_json() const;
};

struct SampleRecord {
  std::string sample_id;
  std::string split;
  std::string gt_path, sr_path, syn_path, mask_path, mgt_path;  // relative
  degrade::DegradationRecipe recipe;
  std::string mask_kind;
  double mask_coverage = 0.0;
  std::uint64_t sample_seed = 0;
  std::string source_model_id;
  std::string gt_source;  // original file + crop offsets
  int crop_y = 0, crop_x = 0;
  nlohmann::ordered_json mgt_stats;

  nlohmann::ordered_json to_json() const;
  static SampleRecord from_json(const nlohmann::ordered_json& j);
};

struct Manifest {
  int schema_version = 1;
  std::uint64_t global_seed = 0;
  std::string extractor_id;
  double alpha = 0.5;
  int image_size = 0;
  std::vector<SampleRecord> records;

  void save(const fs::path& path) const;
  static Manifest load(const fs::path& path);
  void validate_unique_ids() const;
};

struct SampleTriplet {
  std::string sample_id;
  Image gt, sr, syn;
  core::Tensor m_gt;  // [H,W]
  Mask mask;
  degrade::DegradationRecipe recipe;
  std::string source_model_id;
};

/// Recompute the swap from stored gt/sr/mask and compare with the stored syn
/// bitwise (the composition law every record must satisfy).
bool triplet_swap_consistent(const SampleTriplet& t);

/// Build the dataset under out_dir: images/{gt,sr,syn,mask,mgt}/<id>.png,
/// pool/ with generator checkpoints, `manifest`, `config_snapshot`. The
/// whole build is a pure function of (gt_dir contents, cfg, global_seed).
Manifest build_dataset(const fs::path& gt_dir, const fs::path& semantic_mask_dir,
                       const BuildConfig& cfg, const gtpdm::FeatureExtractor& extractor,
                       std::uint64_t global_seed, const fs::path& out_dir);

/// Split view over a stored dataset.
class DatasetView {
 public:
  DatasetView(fs::path root, std::vector<SampleRecord> records);

  size_t size() const { return records_.size(); }
  const SampleRecord& record(size_t i) const { return records_[i]; }

  /// Load and validate one sample; failures name the sample_id.
  SampleTriplet load(size_t i) const;

  /// Deterministic epoch batching: seeded shuffle, complete batches except
  /// possibly the last.
  std::vector<std::vector<size_t>> epoch_batches(int batch_size, std::uint64_t shuffle_seed) const;

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::vector<SampleRecord> records_;
};

/// Records of `split` in manifest order. Throws if the split has no samples.
DatasetView load_split(const Manifest& m, const fs::path& dataset_root, const std::string& split);

}  // namespace percep::fgrstore
