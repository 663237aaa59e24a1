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
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "percep/core/tensor.hpp"
#include "percep/nn/params.hpp"

namespace percep::nn {

/// Versioned archive of named f64 tensors plus a JSON metadata block.
/// Layout: magic, u32 header length, JSON header, raw little-endian payload.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  nlohmann::ordered_json meta;  // model-specific (stage config, ids, ...)
  std::vector<std::pair<std::string, Tensor>> tensors;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  const Tensor* find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return &t;
    return nullptr;
  }

  static Checkpoint from_params(const ParamMap& params, nlohmann::ordered_json meta);
  /// Copies values into an existing ParamMap; names and shapes must match.
  void restore_into(ParamMap& params) const;
};

}  // namespace percep::nn
