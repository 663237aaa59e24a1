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

#include <nlohmann/json.hpp>

#include "percep/core/image.hpp"
#include "percep/nn/graph.hpp"
#include "percep/nn/params.hpp"

namespace percep::refl {

/// Small differentiable upscaler: a conv stem, a few conv blocks, and a
/// pixel-shuffle head squashed through a sigmoid so outputs stay in (0,1).
struct GeneratorConfig {
  std::uint64_t seed = 1;
  int scale = 4;
  int width = 32;
  int blocks = 4;
  int noise_dim = 0;  // optional extra noise channels; 0 keeps runs deterministic

  nlohmann::ordered_json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
  void validate() const;
};

class ToyGenerator {
 public:
  static ToyGenerator init(const GeneratorConfig& cfg);

  const GeneratorConfig& config() const { return cfg_; }
  int scale() const { return cfg_.scale; }
  std::string id() const { return id_; }

  /// [3+noise, h, w] -> [3, h*scale, w*scale]. Pass noise with noise_dim
  /// channels when configured; omitted noise is filled with zeros.
  nn::Var forward(const nn::Var& lr, const nn::Var& noise = nullptr) const;

  core::Image upscale(const core::Image& lr) const;

  nn::ParamMap& params() { return params_; }
  const nn::ParamMap& params() const { return params_; }

  void save(const std::filesystem::path& path) const;
  static ToyGenerator load(const std::filesystem::path& path);

 private:
  ToyGenerator() = default;
  void build_params();

  GeneratorConfig cfg_;
  std::string id_;
  nn::ParamMap params_;
};

}  // namespace percep::refl
