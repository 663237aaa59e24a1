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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percep/core/image.hpp"
#include "percep/nn/checkpoint.hpp"
#include "percep/nn/graph.hpp"
#include "percep/nn/params.hpp"

namespace percep::rm {

// Diagnostic reward model: a multi-scale conv encoder, an optional map
// decoder, and a score head that reads the deepest features modulated by the
// predicted degradation map. Capacity grows along a stage ladder: stage 0 is
// the global-only scorer, stage 1 attaches the decoder, later stages widen
// the decoder and insert zero-initialized adapters into the encoder.

/// One rung of the capacity ladder.
struct StageSpec {
  int decoder_width = 0;   // 0 = no decoder (stage 0 only)
  int adapter_count = 0;   // adapters after the first adapter_count scales
  bool backbone_frozen = false;

  nlohmann::ordered_json to_json() const;
  static StageSpec from_json(const nlohmann::json& j);
};

struct LadderConfig {
  std::uint64_t seed = 1234;
  std::vector<int> enc_channels{12, 24, 48, 64};  // one entry per scale
  int head_hidden = 32;
  std::vector<StageSpec> stages{
      {0, 0, true},
      {16, 0, false},
      {24, 4, false},
  };

  int n_scales() const { return static_cast<int>(enc_channels.size()); }
  int total_stride() const { return 1 << n_scales(); }
  int top_stage() const { return static_cast<int>(stages.size()) - 1; }
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static LadderConfig from_json(const nlohmann::json& j);
};

/// Expected parameter count of the model at a given stage, from the config
/// alone (used by capacity audits).
std::int64_t expected_parameter_count(const LadderConfig& cfg, int stage);

struct RewardOutput {
  double score = 0.0;
  std::optional<core::Tensor> map;  // [H,W], present iff stage >= 1
  int stage = 0;
};

struct ForwardVars {
  nn::Var score;               // scalar
  nn::Var map;                 // [1,H,W] or null at stage 0
  std::vector<nn::Var> feats;  // multi-scale encoder outputs
};

class RewardModel {
 public:
  /// Fresh stage-0 model with seeded initialization.
  static RewardModel init_stage0(const LadderConfig& cfg);

  /// Next rung: every current parameter is carried over (verbatim, or as the
  /// leading block of a widened tensor); new branches are initialized so the
  /// score path is preserved as closely as the architecture allows
  /// (zero-initialized adapter/head extensions, map head biased to ~1).
  static RewardModel expand(const RewardModel& prev);

  int stage() const { return stage_; }
  bool has_decoder() const { return stage_ >= 1; }
  const LadderConfig& config() const { return cfg_; }
  const StageSpec& stage_spec() const { return cfg_.stages[static_cast<size_t>(stage_)]; }

  /// Multi-scale features; input dims must divide the total stride.
  std::vector<nn::Var> encode(const nn::Var& img) const;
  /// Full-resolution degradation map in (0,1); requires stage >= 1.
  nn::Var decode(const std::vector<nn::Var>& feats) const;
  /// Score from features, optionally modulated by a map (mandatory at
  /// stage >= 1 in forward; callable without a map for the decoupled path).
  nn::Var score_from(const std::vector<nn::Var>& feats, const nn::Var& map_or_null) const;

  ForwardVars forward_vars(const nn::Var& img) const;
  RewardOutput forward(const core::Image& img) const;

  nn::ParamMap& params() { return params_; }
  const nn::ParamMap& params() const { return params_; }
  std::int64_t parameter_count() const { return params_.count(); }

  /// Marks trainable leaves per the stage spec (encoder frozen when
  /// backbone_frozen; everything requires_grad=false at stage 0).
  void set_trainable();
  void freeze_all();

  void save(const std::filesystem::path& path) const;
  static RewardModel load(const std::filesystem::path& path);

 private:
  RewardModel() = default;
  void build_params();

  LadderConfig cfg_;
  int stage_ = 0;
  nn::ParamMap params_;
};

/// Bias given to the fresh map head so the initial map is ~1 and expansion
/// barely moves the score path.
inline constexpr double kMapHeadInitBias = 14.0;

}  // namespace percep::rm
