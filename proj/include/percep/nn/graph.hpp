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

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "percep/core/tensor.hpp"

namespace percep::nn {

using core::Tensor;

// Small reverse-mode autodiff over double tensors. Graphs are built eagerly
// per forward pass and discarded after backward(); parameters are long-lived
// leaf nodes shared across passes. Everything is single-threaded and
// deterministic: backward runs in strictly decreasing node-creation order.

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor val;
  Tensor grad;  // allocated on demand, same shape as val
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<Var> parents;
  std::function<void(Node&)> backprop;  // reads this->grad, accumulates into parents

  Tensor& g() {
    if (grad.numel() != val.numel()) grad = Tensor::zeros(val.shape());
    return grad;
  }
  void zero_grad() {
    if (grad.numel()) {
      for (std::int64_t i = 0; i < grad.numel(); ++i) grad[i] = 0.0;
    }
  }
  double scalar() const { return val[0]; }
};

/// Leaf holding data; set requires_grad for trainable parameters and for
/// inputs whose gradient is wanted (e.g. reward backprop into pixels).
Var leaf(Tensor v, bool requires_grad = false);
Var constant(Tensor v);
Var constant_scalar(double v);

/// Backpropagate from a scalar root. Gradients of every node reachable from
/// the root are zeroed first, so repeated calls do not accumulate.
void backward(const Var& root);

// ---- ops ----

Var add(const Var& a, const Var& b);          // same shape
Var sub(const Var& a, const Var& b);          // same shape
Var mul(const Var& a, const Var& b);          // same shape, elementwise
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
Var silu(const Var& x);                       // x * sigmoid(x)
Var sigmoid(const Var& x);

/// Clamp values into [lo, hi]; gradient passes where lo < x < hi, else 0.
Var clamp_vals(const Var& x, double lo, double hi);

/// 2-D convolution: x [Cin,H,W], w [Cout,Cin,kh,kw], b [Cout]; zero padding.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);

/// Fully connected: x [din], w [dout,din], b [dout].
Var linear(const Var& x, const Var& w, const Var& b);

Var concat_ch(const Var& a, const Var& b);    // channel concat of CHW tensors
Var global_avg_pool(const Var& x);            // [C,H,W] -> [C]
Var resize_bilinear(const Var& x, int out_h, int out_w);
Var pixel_shuffle(const Var& x, int r);       // [C*r^2,h,w] -> [C,h*r,w*r]

/// Multiply every channel of x [C,H,W] by the single-channel map m [1,H,W].
Var mul_bcast_ch(const Var& x, const Var& m);

Var mean_all(const Var& x);                   // scalar
Var max_all(const Var& x);                    // scalar; subgradient to the first argmax

/// mean |a - b|; subgradient 0 where a == b exactly.
Var l1_loss(const Var& a, const Var& b);
/// mean (a - b)^2.
Var mse_loss(const Var& a, const Var& b);

/// max(0, margin - d) for scalar d; gradient 0 at the kink (margin - d == 0).
Var hinge(double margin, const Var& d);

/// |a - b| for scalars; subgradient 0 at a == b.
Var abs_diff(const Var& a, const Var& b);

/// Sum of scalar vars, each scaled: sum_i c_i * s_i.
Var weighted_sum(const std::vector<Var>& terms, const std::vector<double>& coeffs);

/// Mean of scalar vars.
Var mean_of(const std::vector<Var>& terms);

}  // namespace percep::nn
