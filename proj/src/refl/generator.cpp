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

#include "percep/refl/generator.hpp"

#include <stdexcept>

#include "percep/core/hash.hpp"
#include "percep/core/rng.hpp"
#include "percep/nn/checkpoint.hpp"

namespace percep::refl {

using core::Rng;
using core::Tensor;
using nn::Var;

nlohmann::ordered_json GeneratorConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["scale"] = scale;
  j["width"] = width;
  j["blocks"] = blocks;
  j["noise_dim"] = noise_dim;
  return j;
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  c.seed = j.value("seed", c.seed);
  c.scale = j.value("scale", c.scale);
  c.width = j.value("width", c.width);
  c.blocks = j.value("blocks", c.blocks);
  c.noise_dim = j.value("noise_dim", c.noise_dim);
  c.validate();
  return c;
}

void GeneratorConfig::validate() const {
  if (scale < 1) throw std::invalid_argument("generator: scale must be >= 1");
  if (width < 1 || blocks < 0 || noise_dim < 0)
    throw std::invalid_argument("generator: bad width/blocks/noise_dim");
}

void ToyGenerator::build_params() {
  cfg_.validate();
  auto seeded = [&](const std::string& name) { return Rng(core::mix_seed(cfg_.seed, name)); };
  auto add_he = [&](const std::string& name, std::vector<int> shape, std::int64_t fan_in) {
    params_.add(name, nn::he_init(std::move(shape), fan_in, seeded(name)));
  };
  auto add_gauss = [&](const std::string& name, std::vector<int> shape, double sd) {
    params_.add(name, nn::gauss_init(std::move(shape), sd, seeded(name)));
  };
  const int w = cfg_.width;
  const int cin = 3 + cfg_.noise_dim;
  add_he("stem.w", {w, cin, 3, 3}, static_cast<std::int64_t>(cin) * 9);
  add_gauss("stem.b", {w}, 0.05);
  for (int b = 0; b < cfg_.blocks; ++b) {
    const std::string s = "block" + std::to_string(b);
    add_he(s + ".w", {w, w, 3, 3}, static_cast<std::int64_t>(w) * 9);
    add_gauss(s + ".b", {w}, 0.05);
  }
  const int cout = 3 * cfg_.scale * cfg_.scale;
  add_he("head.w", {cout, w, 3, 3}, static_cast<std::int64_t>(w) * 9);
  add_gauss("head.b", {cout}, 0.05);
  id_ = "toygen-v1/seed=" + core::hex64(cfg_.seed) + "/w=" + std::to_string(w) +
        "/b=" + std::to_string(cfg_.blocks) + "/x" + std::to_string(cfg_.scale);
}

ToyGenerator ToyGenerator::init(const GeneratorConfig& cfg) {
  ToyGenerator g;
  g.cfg_ = cfg;
  g.build_params();
  return g;
}

Var ToyGenerator::forward(const Var& lr, const Var& noise) const {
  if (lr->val.rank() != 3 || lr->val.dim(0) != 3)
    throw std::invalid_argument("generator forward: expected [3,h,w] input");
  Var x = lr;
  if (cfg_.noise_dim > 0) {
    Var z = noise;
    if (!z) z = nn::constant(Tensor::zeros({cfg_.noise_dim, lr->val.dim(1), lr->val.dim(2)}));
    if (z->val.dim(0) != cfg_.noise_dim || z->val.dim(1) != lr->val.dim(1) ||
        z->val.dim(2) != lr->val.dim(2))
      throw std::invalid_argument("generator forward: bad noise shape");
    x = nn::concat_ch(x, z);
  }
  x = nn::silu(nn::conv2d(x, params_.at("stem.w"), params_.at("stem.b"), 1, 1));
  for (int b = 0; b < cfg_.blocks; ++b) {
    const std::string s = "block" + std::to_string(b);
    x = nn::silu(nn::conv2d(x, params_.at(s + ".w"), params_.at(s + ".b"), 1, 1));
  }
  x = nn::conv2d(x, params_.at("head.w"), params_.at("head.b"), 1, 1);
  if (cfg_.scale > 1) x = nn::pixel_shuffle(x, cfg_.scale);
  return nn::sigmoid(x);
}

core::Image ToyGenerator::upscale(const core::Image& lr) const {
  Var out = forward(nn::constant(lr.chw));
  return core::Image(out->val);
}

void ToyGenerator::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json meta;
  meta["kind"] = "toy_generator";
  meta["config"] = cfg_.to_json();
  nn::Checkpoint::from_params(params_, std::move(meta)).save(path);
}

ToyGenerator ToyGenerator::load(const std::filesystem::path& path) {
  nn::Checkpoint ck = nn::Checkpoint::load(path);
  if (ck.meta.value("kind", "") != "toy_generator")
    throw std::runtime_error("not a generator checkpoint: " + path.string());
  ToyGenerator g;
  g.cfg_ = GeneratorConfig::from_json(ck.meta.at("config"));
  g.build_params();
  ck.restore_into(g.params_);
  return g;
}

}  // namespace percep::refl
