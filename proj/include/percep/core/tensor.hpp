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
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace percep::core {

/// Dense row-major tensor of doubles, rank 0..4. Images and feature maps use
/// CHW layout; scalars are rank-0 with one element.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    v_.assign(static_cast<size_t>(count(shape_)), 0.0);
  }

  static Tensor scalar(double v) {
    Tensor t{std::vector<int>{}};
    t.v_[0] = v;
    return t;
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    for (auto& x : t.v_) x = v;
    return t;
  }

  static Tensor from(std::vector<int> shape, std::vector<double> data) {
    Tensor t;
    if (count(shape) != static_cast<std::int64_t>(data.size()))
      throw std::invalid_argument("Tensor::from: shape/data size mismatch");
    t.shape_ = std::move(shape);
    t.v_ = std::move(data);
    return t;
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  const std::vector<int>& shape() const { return shape_; }
  std::int64_t numel() const { return static_cast<std::int64_t>(v_.size()); }
  bool empty() const { return v_.empty(); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& vec() { return v_; }
  const std::vector<double>& vec() const { return v_; }

  double& operator[](std::int64_t i) { return v_[static_cast<size_t>(i)]; }
  double operator[](std::int64_t i) const { return v_[static_cast<size_t>(i)]; }

  // CHW accessors.
  double& at(int c, int y, int x) { return v_[idx3(c, y, x)]; }
  double at(int c, int y, int x) const { return v_[idx3(c, y, x)]; }
  // HW accessors.
  double& at(int y, int x) { return v_[idx2(y, x)]; }
  double at(int y, int x) const { return v_[idx2(y, x)]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  static std::int64_t count(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

 private:
  size_t idx3(int c, int y, int x) const {
    return static_cast<size_t>((static_cast<std::int64_t>(c) * shape_[1] + y) * shape_[2] + x);
  }
  size_t idx2(int y, int x) const {
    return static_cast<size_t>(static_cast<std::int64_t>(y) * shape_[1] + x);
  }

  std::vector<int> shape_;
  std::vector<double> v_;
};

}  // namespace percep::core
