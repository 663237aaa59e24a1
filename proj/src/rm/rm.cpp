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

#include "percep/rm/rm.hpp"

#include <stdexcept>

#include "percep/core/rng.hpp"

namespace percep::rm {

using core::Rng;
using core::Tensor;
using nn::Var;

nlohmann::ordered_json StageSpec::to_json() const {
  nlohmann::ordered_json j;
  j["decoder_width"] = decoder_width;
  j["adapter_count"] = adapter_count;
  j["backbone_frozen"] = backbone_frozen;
  return j;
}

StageSpec StageSpec::from_json(const nlohmann::json& j) {
  StageSpec s;
  s.decoder_width = j.value("decoder_width", 0);
  s.adapter_count = j.value("adapter_count", 0);
  s.backbone_frozen = j.value("backbone_frozen", false);
  return s;
}

void LadderConfig::validate() const {
  if (enc_channels.size() < 2) throw std::invalid_argument("rm config: need at least 2 scales");
  for (int c : enc_channels)
    if (c < 1) throw std::invalid_argument("rm config: bad encoder channel count");
  if (head_hidden < 1) throw std::invalid_argument("rm config: bad head width");
  if (stages.empty()) throw std::invalid_argument("rm config: empty stage ladder");
  if (stages[0].decoder_width != 0 || stages[0].adapter_count != 0)
    throw std::invalid_argument("rm config: stage 0 must be the global-only scorer");
  for (size_t k = 1; k < stages.size(); ++k) {
    const auto& s = stages[k];
    const auto& p = stages[k - 1];
    if (s.decoder_width < 1)
      throw std::invalid_argument("rm config: stage >= 1 requires a decoder");
    if (s.decoder_width < p.decoder_width || s.adapter_count < p.adapter_count)
      throw std::invalid_argument("rm config: non-monotone capacity ladder");
    if (s.adapter_count > n_scales())
      throw std::invalid_argument("rm config: more adapters than encoder scales");
    if (k >= 2 && s.decoder_width == p.decoder_width && s.adapter_count == p.adapter_count)
      throw std::invalid_argument("rm config: stage " + std::to_string(k) +
                                  " does not grow capacity");
  }
}

nlohmann::ordered_json LadderConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["enc_channels"] = enc_channels;
  j["head_hidden"] = head_hidden;
  auto& arr = j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) arr.push_back(s.to_json());
  return j;
}

LadderConfig LadderConfig::from_json(const nlohmann::json& j) {
  LadderConfig c;
  c.seed = j.value("seed", c.seed);
  if (j.contains("enc_channels")) c.enc_channels = j["enc_channels"].get<std::vector<int>>();
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  if (j.contains("stages")) {
    c.stages.clear();
    for (const auto& e : j["stages"]) c.stages.push_back(StageSpec::from_json(e));
  }
  c.validate();
  return c;
}

namespace {

int bottleneck(int c) { return std::max(c / 4, 2); }

}  // namespace

std::int64_t expected_parameter_count(const LadderConfig& cfg, int stage) {
  cfg.validate();
  const auto& spec = cfg.stages.at(static_cast<size_t>(stage));
  const int n = cfg.n_scales();
  std::int64_t total = 0;
  int prev = 3;
  for (int i = 0; i < n; ++i) {
    const int c = cfg.enc_channels[static_cast<size_t>(i)];
    total += static_cast<std::int64_t>(c) * prev * 9 + c;  // stride-2 conv
    total += static_cast<std::int64_t>(c) * c * 9 + c;     // stride-1 conv
    prev = c;
  }
  const int cn = cfg.enc_channels.back();
  total += static_cast<std::int64_t>(cfg.head_hidden) * cn + cfg.head_hidden;
  total += cfg.head_hidden + 1;
  for (int i = 0; i < spec.adapter_count; ++i) {
    const int c = cfg.enc_channels[static_cast<size_t>(i)];
    const int b = bottleneck(c);
    total += static_cast<std::int64_t>(b) * c + b;
    total += static_cast<std::int64_t>(c) * b + c;
  }
  if (spec.decoder_width > 0) {
    const int w = spec.decoder_width;
    for (int i = 0; i < n; ++i)
      total += static_cast<std::int64_t>(w) * cfg.enc_channels[static_cast<size_t>(i)] + w;
    total += (static_cast<std::int64_t>(w) * w * 9 + w) * (n - 1);  // fuse convs
    total += static_cast<std::int64_t>(w) * w * 9 + w;              // final conv
    total += w + 1;                                                 // 1x1 map head
  }
  return total;
}

void RewardModel::build_params() {
  cfg_.validate();
  const auto& spec = stage_spec();
  const int n = cfg_.n_scales();
  auto seeded = [&](const std::string& name) {
    return Rng(core::mix_seed(cfg_.seed, name + "#s" + std::to_string(stage_)));
  };
  auto add_he = [&](const std::string& name, std::vector<int> shape, std::int64_t fan_in) {
    params_.add(name, nn::he_init(std::move(shape), fan_in, seeded(name)));
  };
  auto add_gauss = [&](const std::string& name, std::vector<int> shape, double sd) {
    params_.add(name, nn::gauss_init(std::move(shape), sd, seeded(name)));
  };

  int prev = 3;
  for (int i = 0; i < n; ++i) {
    const int c = cfg_.enc_channels[static_cast<size_t>(i)];
    const std::string s = "enc.s" + std::to_string(i);
    add_he(s + ".a.w", {c, prev, 3, 3}, static_cast<std::int64_t>(prev) * 9);
    add_gauss(s + ".a.b", {c}, 0.05);
    add_he(s + ".b.w", {c, c, 3, 3}, static_cast<std::int64_t>(c) * 9);
    add_gauss(s + ".b.b", {c}, 0.05);
    prev = c;
  }
  for (int i = 0; i < spec.adapter_count; ++i) {
    const int c = cfg_.enc_channels[static_cast<size_t>(i)];
    const int b = bottleneck(c);
    const std::string s = "adapter.s" + std::to_string(i);
    add_he(s + ".down.w", {b, c, 1, 1}, c);
    add_gauss(s + ".down.b", {b}, 0.05);
    // Zero-initialized residual exit keeps the expanded encoder an identity.
    params_.add(s + ".up.w", Tensor::zeros({c, b, 1, 1}));
    params_.add(s + ".up.b", Tensor::zeros({c}));
  }
  if (spec.decoder_width > 0) {
    const int w = spec.decoder_width;
    for (int i = 0; i < n; ++i) {
      const int c = cfg_.enc_channels[static_cast<size_t>(i)];
      const std::string s = "dec.lat" + std::to_string(i);
      add_he(s + ".w", {w, c, 1, 1}, c);
      add_gauss(s + ".b", {w}, 0.05);
    }
    for (int i = 0; i < n - 1; ++i) {
      const std::string s = "dec.fuse" + std::to_string(i);
      add_he(s + ".w", {w, w, 3, 3}, static_cast<std::int64_t>(w) * 9);
      add_gauss(s + ".b", {w}, 0.05);
    }
    add_he("dec.final.w", {w, w, 3, 3}, static_cast<std::int64_t>(w) * 9);
    add_gauss("dec.final.b", {w}, 0.05);
    // Map head starts at sigmoid(kMapHeadInitBias) ~ 1 so attaching the
    // decoder leaves the score path essentially untouched.
    params_.add("dec.head.w", Tensor::zeros({1, w, 1, 1}));
    params_.add("dec.head.b", Tensor::full({1}, kMapHeadInitBias));
  }
  const int cn = cfg_.enc_channels.back();
  add_he("head.fc1.w", {cfg_.head_hidden, cn}, cn);
  add_gauss("head.fc1.b", {cfg_.head_hidden}, 0.05);
  add_he("head.fc2.w", {1, cfg_.head_hidden}, cfg_.head_hidden);
  add_gauss("head.fc2.b", {1}, 0.05);
}

RewardModel RewardModel::init_stage0(const LadderConfig& cfg) {
  RewardModel m;
  m.cfg_ = cfg;
  m.stage_ = 0;
  m.build_params();
  return m;
}

RewardModel RewardModel::expand(const RewardModel& prev) {
  const auto& cfg = prev.cfg_;
  if (prev.stage_ >= cfg.top_stage())
    throw std::invalid_argument("expand: already at the top stage");
  RewardModel next;
  next.cfg_ = cfg;
  next.stage_ = prev.stage_ + 1;
  next.build_params();

  for (auto& [name, v] : next.params_) {
    const Var old = prev.params_.find(name);
    if (!old) continue;  // brand-new branch, keep fresh init
    if (old->val.same_shape(v->val)) {
      v->val = old->val;  // verbatim carry-over
      continue;
    }
    // Widened decoder tensor: old values become the leading block; new input
    // columns feeding old output rows are zeroed so the function at the
    // moment of expansion is unchanged.
    const Tensor& o = old->val;
    Tensor& t = v->val;
    if (o.rank() == 4 && name.rfind("dec.", 0) == 0) {
      const int oc = o.dim(0), ic = o.dim(1), kh = o.dim(2), kw = o.dim(3);
      const int nc_in = t.dim(1);
      for (int a = 0; a < oc; ++a)
        for (int b = 0; b < nc_in; ++b)
          for (int y = 0; y < kh; ++y)
            for (int x = 0; x < kw; ++x) {
              const std::int64_t idx =
                  ((static_cast<std::int64_t>(a) * nc_in + b) * kh + y) * kw + x;
              if (b < ic) {
                t[idx] = o[((static_cast<std::int64_t>(a) * ic + b) * kh + y) * kw + x];
              } else if (name.rfind("dec.lat", 0) != 0) {
                // widened input channels (decoder-internal convs only)
                t[idx] = 0.0;
              }
            }
    } else if (o.rank() == 1) {
      for (int i = 0; i < o.dim(0); ++i) t[i] = o[i];
    } else {
      throw std::logic_error("expand: unexpected shape change for " + name);
    }
  }
  return next;
}

std::vector<Var> RewardModel::encode(const nn::Var& img) const {
  const int h = img->val.dim(1), w = img->val.dim(2);
  const int stride = cfg_.total_stride();
  if (h % stride != 0 || w % stride != 0)
    throw std::invalid_argument("encode: input " + std::to_string(h) + "x" + std::to_string(w) +
                                " not divisible by total stride " + std::to_string(stride));
  const auto& spec = stage_spec();
  std::vector<Var> feats;
  Var x = img;
  for (int i = 0; i < cfg_.n_scales(); ++i) {
    const std::string s = "enc.s" + std::to_string(i);
    x = nn::silu(nn::conv2d(x, params_.at(s + ".a.w"), params_.at(s + ".a.b"), 2, 1));
    x = nn::silu(nn::conv2d(x, params_.at(s + ".b.w"), params_.at(s + ".b.b"), 1, 1));
    if (i < spec.adapter_count) {
      const std::string a = "adapter.s" + std::to_string(i);
      Var down = nn::silu(nn::conv2d(x, params_.at(a + ".down.w"), params_.at(a + ".down.b"), 1, 0));
      Var up = nn::conv2d(down, params_.at(a + ".up.w"), params_.at(a + ".up.b"), 1, 0);
      x = nn::add(x, up);
    }
    feats.push_back(x);
  }
  return feats;
}

Var RewardModel::decode(const std::vector<Var>& feats) const {
  if (stage_ < 1) throw std::logic_error("decode: stage 0 has no decoder");
  if (feats.size() != static_cast<size_t>(cfg_.n_scales()))
    throw std::invalid_argument("decode: wrong number of feature scales");
  const int n = cfg_.n_scales();
  auto lat = [&](int i, const Var& f) {
    const std::string s = "dec.lat" + std::to_string(i);
    return nn::conv2d(f, params_.at(s + ".w"), params_.at(s + ".b"), 1, 0);
  };
  Var p = lat(n - 1, feats[static_cast<size_t>(n - 1)]);
  for (int i = n - 2; i >= 0; --i) {
    const Var& f = feats[static_cast<size_t>(i)];
    Var up = nn::resize_bilinear(p, f->val.dim(1), f->val.dim(2));
    const std::string s = "dec.fuse" + std::to_string(i);
    p = nn::silu(nn::conv2d(nn::add(up, lat(i, f)), params_.at(s + ".w"), params_.at(s + ".b"),
                            1, 1));
  }
  // Final refinement runs at the top lateral resolution; only the head sees
  // the upsampled grid (full-resolution 3x3 convs dominate the cost).
  p = nn::silu(nn::conv2d(p, params_.at("dec.final.w"), params_.at("dec.final.b"), 1, 1));
  p = nn::resize_bilinear(p, feats[0]->val.dim(1) * 2, feats[0]->val.dim(2) * 2);
  Var pre = nn::conv2d(p, params_.at("dec.head.w"), params_.at("dec.head.b"), 1, 0);
  // The sigmoid saturates to exactly 0/1 in doubles for |pre| beyond ~37;
  // keep the map strictly inside (0,1) for any weights.
  return nn::clamp_vals(nn::sigmoid(pre), 2.2250738585072014e-308, 1.0 - 1.1102230246251565e-16);
}

Var RewardModel::score_from(const std::vector<Var>& feats, const nn::Var& map_or_null) const {
  Var fn = feats.back();
  if (map_or_null) {
    Var small = nn::resize_bilinear(map_or_null, fn->val.dim(1), fn->val.dim(2));
    fn = nn::mul_bcast_ch(fn, small);
  }
  Var pooled = nn::global_avg_pool(fn);
  Var h = nn::silu(nn::linear(pooled, params_.at("head.fc1.w"), params_.at("head.fc1.b")));
  Var s = nn::sigmoid(nn::linear(h, params_.at("head.fc2.w"), params_.at("head.fc2.b")));
  return nn::mean_all(s);  // [1] -> scalar
}

ForwardVars RewardModel::forward_vars(const nn::Var& img) const {
  ForwardVars out;
  out.feats = encode(img);
  if (stage_ >= 1) {
    out.map = decode(out.feats);
    out.score = score_from(out.feats, out.map);
  } else {
    out.score = score_from(out.feats, nullptr);
  }
  return out;
}

RewardOutput RewardModel::forward(const core::Image& img) const {
  ForwardVars v = forward_vars(nn::constant(img.chw));
  RewardOutput out;
  out.stage = stage_;
  out.score = v.score->scalar();
  if (v.map) {
    Tensor m({v.map->val.dim(1), v.map->val.dim(2)});
    for (std::int64_t i = 0; i < m.numel(); ++i) m[i] = v.map->val[i];
    out.map = std::move(m);
  }
  return out;
}

void RewardModel::set_trainable() {
  if (stage_ == 0) {
    params_.set_requires_grad(false);
    return;
  }
  params_.set_requires_grad(true);
  if (stage_spec().backbone_frozen) params_.set_requires_grad_prefix("enc.", false);
}

void RewardModel::freeze_all() { params_.set_requires_grad(false); }

void RewardModel::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json meta;
  meta["kind"] = "reward_model";
  meta["backbone"] = "convpyr-v1";
  meta["stage"] = stage_;
  meta["ladder"] = cfg_.to_json();
  nn::Checkpoint::from_params(params_, std::move(meta)).save(path);
}

RewardModel RewardModel::load(const std::filesystem::path& path) {
  nn::Checkpoint ck = nn::Checkpoint::load(path);
  if (ck.meta.value("kind", "") != "reward_model")
    throw std::runtime_error("not a reward model checkpoint: " + path.string());
  RewardModel m;
  m.cfg_ = LadderConfig::from_json(ck.meta.at("ladder"));
  m.stage_ = ck.meta.at("stage").get<int>();
  if (m.stage_ < 0 || m.stage_ > m.cfg_.top_stage())
    throw std::runtime_error("checkpoint stage out of range: " + path.string());
  m.build_params();
  ck.restore_into(m.params_);
  m.freeze_all();
  return m;
}

}  // namespace percep::rm
