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
#include <map>
#include <string>

#include "percep/nn/params.hpp"

namespace percep::nn {

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

  /// One update over every parameter with requires_grad set. Gradients must
  /// already be populated by backward().
  void step(ParamMap& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto& [name, v] : params) {
      if (!v->requires_grad) continue;
      auto& s = state_[name];
      if (s.m.numel() != v->val.numel()) {
        s.m = Tensor::zeros(v->val.shape());
        s.v = Tensor::zeros(v->val.shape());
      }
      const Tensor& g = v->grad.numel() ? v->grad : (v->g(), v->grad);
      for (std::int64_t i = 0; i < v->val.numel(); ++i) {
        const double gi = g.numel() ? g[i] : 0.0;
        s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * gi;
        s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * gi * gi;
        const double mhat = s.m[i] / bc1;
        const double vhat = s.v[i] / bc2;
        v->val[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  struct Slot {
    Tensor m, v;
  };
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::map<std::string, Slot> state_;
};

}  // namespace percep::nn
