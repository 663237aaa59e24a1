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

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "percep/core/rng.hpp"
#include "percep/nn/graph.hpp"

namespace percep::nn {

/// Ordered collection of named parameter leaves. Order is the registration
/// order and is what the optimizer and checkpoints iterate over.
class ParamMap {
 public:
  Var add(const std::string& name, Tensor init) {
    if (find(name)) throw std::invalid_argument("ParamMap: duplicate name " + name);
    Var v = leaf(std::move(init), false);
    items_.emplace_back(name, v);
    return v;
  }

  Var find(const std::string& name) const {
    for (const auto& [n, v] : items_)
      if (n == name) return v;
    return nullptr;
  }

  Var at(const std::string& name) const {
    Var v = find(name);
    if (!v) throw std::invalid_argument("ParamMap: missing parameter " + name);
    return v;
  }

  void set_requires_grad(bool rg) {
    for (auto& [n, v] : items_) v->requires_grad = rg;
  }

  void set_requires_grad_prefix(const std::string& prefix, bool rg) {
    for (auto& [n, v] : items_)
      if (n.rfind(prefix, 0) == 0) v->requires_grad = rg;
  }

  std::int64_t count() const {
    std::int64_t n = 0;
    for (const auto& [name, v] : items_) n += v->val.numel();
    return n;
  }

  double grad_norm() const {
    double s = 0.0;
    for (const auto& [name, v] : items_) {
      if (!v->requires_grad || !v->grad.numel()) continue;
      for (std::int64_t i = 0; i < v->grad.numel(); ++i) s += v->grad[i] * v->grad[i];
    }
    return std::sqrt(s);
  }

  /// Order-insensitive fingerprint of all parameter values.
  std::uint64_t checksum() const;

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  size_t size() const { return items_.size(); }

 private:
  std::vector<std::pair<std::string, Var>> items_;
};

// Seeded initializers. The stream for each tensor is derived from
// (model_seed, parameter_name) so values do not depend on creation order.

inline Tensor gauss_init(std::vector<int> shape, double stddev, core::Rng rng) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.gauss(0.0, stddev);
  return t;
}

/// He-style init for conv/linear weights: std = sqrt(2 / fan_in).
inline Tensor he_init(std::vector<int> shape, std::int64_t fan_in, core::Rng rng) {
  return gauss_init(std::move(shape), std::sqrt(2.0 / static_cast<double>(fan_in)), std::move(rng));
}

}  // namespace percep::nn
