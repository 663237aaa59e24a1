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

#include "percep/degrade/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "percep/core/imageops.hpp"
#include "percep/core/io.hpp"

namespace percep::degrade {

DownFilter down_filter_from(const std::string& s) {
  if (s == "box") return DownFilter::box;
  if (s == "bilinear") return DownFilter::bilinear;
  throw std::invalid_argument("unknown downsample filter: " + s);
}

const char* down_filter_name(DownFilter f) {
  return f == DownFilter::box ? "box" : "bilinear";
}

nlohmann::ordered_json DegradeOp::to_json() const {
  nlohmann::ordered_json j;
  switch (kind) {
    case Kind::blur:
      j["op"] = "blur";
      j["sigma"] = sigma;
      break;
    case Kind::downsample:
      j["op"] = "downsample";
      j["factor"] = factor;
      j["filter"] = down_filter_name(filter);
      break;
    case Kind::gaussian_noise:
      j["op"] = "gaussian_noise";
      j["sigma"] = noise_sigma;
      break;
    case Kind::jpeg:
      j["op"] = "jpeg";
      j["quality"] = quality;
      break;
  }
  return j;
}

DegradeOp DegradeOp::from_json(const nlohmann::json& j) {
  DegradeOp op{};
  const std::string k = j.at("op").get<std::string>();
  if (k == "blur") {
    op.kind = Kind::blur;
    op.sigma = j.at("sigma").get<double>();
  } else if (k == "downsample") {
    op.kind = Kind::downsample;
    op.factor = j.at("factor").get<int>();
    op.filter = down_filter_from(j.at("filter").get<std::string>());
  } else if (k == "gaussian_noise") {
    op.kind = Kind::gaussian_noise;
    op.noise_sigma = j.at("sigma").get<double>();
  } else if (k == "jpeg") {
    op.kind = Kind::jpeg;
    op.quality = j.at("quality").get<int>();
  } else {
    throw std::invalid_argument("unknown degrade op: " + k);
  }
  return op;
}

nlohmann::ordered_json DegradationRecipe::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["scale"] = scale;
  auto& arr = j["ops"] = nlohmann::ordered_json::array();
  for (const auto& op : ops) arr.push_back(op.to_json());
  return j;
}

DegradationRecipe DegradationRecipe::from_json(const nlohmann::json& j) {
  DegradationRecipe r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.scale = j.at("scale").get<int>();
  for (const auto& e : j.at("ops")) r.ops.push_back(DegradeOp::from_json(e));
  r.validate();
  return r;
}

void DegradationRecipe::validate() const {
  if (scale < 1) throw std::invalid_argument("recipe: scale must be >= 1");
  std::int64_t reduction = 1;
  for (const auto& op : ops)
    if (op.kind == DegradeOp::Kind::downsample) {
      if (op.factor < 1) throw std::invalid_argument("recipe: downsample factor must be >= 1");
      reduction *= op.factor;
    }
  if (reduction != scale)
    throw std::invalid_argument("recipe: net spatial reduction " + std::to_string(reduction) +
                                " != scale " + std::to_string(scale));
}

void DegradeProfile::validate() const {
  auto check = [](double lo, double hi, const char* name) {
    if (!(lo <= hi)) throw std::invalid_argument(std::string("degrade profile: inverted ") + name +
                                                 " range");
    if (lo < 0) throw std::invalid_argument(std::string("degrade profile: negative ") + name);
  };
  if (scale < 1) throw std::invalid_argument("degrade profile: scale must be >= 1");
  check(blur_sigma.first, blur_sigma.second, "blur_sigma");
  check(noise_sigma.first, noise_sigma.second, "noise_sigma");
  if (jpeg_quality.first > jpeg_quality.second || jpeg_quality.first < 1 ||
      jpeg_quality.second > 100)
    throw std::invalid_argument("degrade profile: jpeg_quality range must be within [1,100]");
}

nlohmann::ordered_json DegradeProfile::to_json() const {
  nlohmann::ordered_json j;
  j["scale"] = scale;
  j["blur_sigma"] = {blur_sigma.first, blur_sigma.second};
  j["down_filter"] = down_filter_name(down_filter);
  j["noise_sigma"] = {noise_sigma.first, noise_sigma.second};
  j["jpeg_quality"] = {jpeg_quality.first, jpeg_quality.second};
  j["use_jpeg"] = use_jpeg;
  return j;
}

DegradeProfile DegradeProfile::from_json(const nlohmann::json& j) {
  DegradeProfile p;
  p.scale = j.value("scale", p.scale);
  if (j.contains("blur_sigma"))
    p.blur_sigma = {j["blur_sigma"][0].get<double>(), j["blur_sigma"][1].get<double>()};
  if (j.contains("down_filter")) p.down_filter = down_filter_from(j["down_filter"].get<std::string>());
  if (j.contains("noise_sigma"))
    p.noise_sigma = {j["noise_sigma"][0].get<double>(), j["noise_sigma"][1].get<double>()};
  if (j.contains("jpeg_quality"))
    p.jpeg_quality = {j["jpeg_quality"][0].get<int>(), j["jpeg_quality"][1].get<int>()};
  p.use_jpeg = j.value("use_jpeg", p.use_jpeg);
  p.validate();
  return p;
}

DegradationRecipe sample_recipe(std::uint64_t seed, const DegradeProfile& profile) {
  profile.validate();
  core::Rng rng(core::mix_seed(seed, "recipe"));
  DegradationRecipe r;
  r.seed = seed;
  r.scale = profile.scale;

  DegradeOp blur{};
  blur.kind = DegradeOp::Kind::blur;
  blur.sigma = rng.uniform(profile.blur_sigma.first, profile.blur_sigma.second);
  r.ops.push_back(blur);

  DegradeOp down{};
  down.kind = DegradeOp::Kind::downsample;
  down.factor = profile.scale;
  down.filter = profile.down_filter;
  r.ops.push_back(down);

  DegradeOp noise{};
  noise.kind = DegradeOp::Kind::gaussian_noise;
  noise.noise_sigma = rng.uniform(profile.noise_sigma.first, profile.noise_sigma.second);
  r.ops.push_back(noise);

  if (profile.use_jpeg) {
    DegradeOp jpeg{};
    jpeg.kind = DegradeOp::Kind::jpeg;
    jpeg.quality = static_cast<int>(
        rng.uniform_int(profile.jpeg_quality.first, profile.jpeg_quality.second));
    r.ops.push_back(jpeg);
  }
  r.validate();
  return r;
}

Image apply_pipeline(const Image& img, const DegradationRecipe& recipe) {
  img.check_valid("apply_pipeline");
  recipe.validate();
  if (img.height() % recipe.scale != 0 || img.width() % recipe.scale != 0)
    throw std::invalid_argument("apply_pipeline: image " + std::to_string(img.height()) + "x" +
                                std::to_string(img.width()) + " not divisible by scale " +
                                std::to_string(recipe.scale));
  core::Tensor cur = img.chw;
  for (size_t i = 0; i < recipe.ops.size(); ++i) {
    const auto& op = recipe.ops[i];
    switch (op.kind) {
      case DegradeOp::Kind::blur:
        cur = core::gaussian_blur(cur, op.sigma);
        break;
      case DegradeOp::Kind::downsample: {
        if (op.filter == DownFilter::box) {
          cur = core::box_downsample(cur, op.factor);
        } else {
          cur = core::resize_bilinear(cur, cur.dim(1) / op.factor, cur.dim(2) / op.factor);
        }
        break;
      }
      case DegradeOp::Kind::gaussian_noise: {
        // Noise stream depends on the recipe seed and the op position only.
        core::Rng rng(core::mix_seed(recipe.seed, "noise_op_" + std::to_string(i)));
        for (std::int64_t k = 0; k < cur.numel(); ++k) cur[k] += rng.gauss(0.0, op.noise_sigma);
        break;
      }
      case DegradeOp::Kind::jpeg: {
        Image tmp(core::clamp01(std::move(cur)));
        cur = core::jpeg_roundtrip(tmp, op.quality).chw;
        break;
      }
    }
    cur = core::clamp01(std::move(cur));
  }
  Image out(std::move(cur));
  if (out.height() != img.height() / recipe.scale || out.width() != img.width() / recipe.scale)
    throw std::logic_error("apply_pipeline: op chain did not realize the recipe scale");
  return out;
}

}  // namespace percep::degrade
