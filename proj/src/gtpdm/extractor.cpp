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

#include "percep/gtpdm/extractor.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

#include "percep/core/hash.hpp"
#include "percep/core/rng.hpp"
#include "percep/nn/checkpoint.hpp"
#include "percep/nn/graph.hpp"
#include "percep/nn/params.hpp"

namespace percep::gtpdm {

namespace {

// Three 3x3 stride-2 convs: rf = 3 -> 7 -> 15, stride 8.
constexpr int kStride = 8;
constexpr int kReceptiveField = 15;

struct ConvStackExtractor final : FeatureExtractor {
  nn::ParamMap params;
  std::vector<int> channels;  // {3, c1, c2, dim}
  std::string id_;

  FeatureMap extract(const core::Image& img) const override {
    img.check_valid("extract");
    if (img.channels() != channels[0])
      throw std::invalid_argument("extract: expected " + std::to_string(channels[0]) +
                                  "-channel input");
    nn::Var x = nn::constant(img.chw);
    for (size_t l = 0; l + 1 < channels.size(); ++l) {
      x = nn::conv2d(x, params.at("conv" + std::to_string(l) + ".w"),
                     params.at("conv" + std::to_string(l) + ".b"), /*stride=*/2, /*pad=*/1);
      if (l + 2 < channels.size()) x = nn::silu(x);  // last layer stays linear
    }
    FeatureMap fm;
    fm.grid = x->val;
    fm.extractor_id = id_;
    fm.stride = kStride;
    return fm;
  }

  std::string id() const override { return id_; }
  int stride() const override { return kStride; }
  int receptive_field() const override { return kReceptiveField; }

  void save(const std::filesystem::path& path) const override {
    nlohmann::ordered_json meta;
    meta["kind"] = "conv_stack_extractor";
    meta["channels"] = channels;
    meta["id"] = id_;
    nn::Checkpoint::from_params(params, std::move(meta)).save(path);
  }
};

void build_params(ConvStackExtractor& e, std::uint64_t seed) {
  for (size_t l = 0; l + 1 < e.channels.size(); ++l) {
    const int cin = e.channels[l], cout = e.channels[l + 1];
    const std::string base = "conv" + std::to_string(l);
    core::Rng rw(core::mix_seed(seed, base + ".w"));
    e.params.add(base + ".w", nn::he_init({cout, cin, 3, 3}, static_cast<std::int64_t>(cin) * 9,
                                          std::move(rw)));
    core::Rng rb(core::mix_seed(seed, base + ".b"));
    e.params.add(base + ".b", nn::gauss_init({cout}, 0.1, std::move(rb)));
  }
}

}  // namespace

std::unique_ptr<FeatureExtractor> make_random_projector(std::uint64_t seed, int dim) {
  if (dim < 1) throw std::invalid_argument("make_random_projector: dim must be >= 1");
  auto e = std::make_unique<ConvStackExtractor>();
  e->channels = {3, 16, 32, dim};
  e->id_ = "randproj-v1/seed=" + core::hex64(seed) + "/dim=" + std::to_string(dim);
  build_params(*e, seed);
  return e;
}

std::unique_ptr<FeatureExtractor> load_file_extractor(const std::filesystem::path& path) {
  nn::Checkpoint ck = nn::Checkpoint::load(path);
  if (ck.meta.value("kind", "") != "conv_stack_extractor")
    throw std::runtime_error("load_file_extractor: not an extractor checkpoint: " + path.string());
  auto e = std::make_unique<ConvStackExtractor>();
  e->channels = ck.meta.at("channels").get<std::vector<int>>();
  if (e->channels.size() != 4 || e->channels[0] != 3)
    throw std::runtime_error("load_file_extractor: unsupported layer layout in " + path.string());
  // Identity comes from the file content, not the embedded id, so datasets
  // built from different weights are never silently mixed.
  e->id_ = "file/" + path.filename().string() + "@" + core::hash_file_hex(path);
  for (auto& [name, t] : ck.tensors) e->params.add(name, std::move(t));
  for (size_t l = 0; l + 1 < e->channels.size(); ++l) {
    const std::string base = "conv" + std::to_string(l);
    e->params.at(base + ".w");
    e->params.at(base + ".b");
  }
  return e;
}

}  // namespace percep::gtpdm
