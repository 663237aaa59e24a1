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

#include "percep/cli/config.hpp"

#include <cstdlib>
#include <fstream>

#include "percep/core/hash.hpp"

namespace percep::cli {

std::unique_ptr<gtpdm::FeatureExtractor> ExtractorConfig::make() const {
  if (kind == "randproj") return gtpdm::make_random_projector(seed, dim);
  if (kind == "file") return gtpdm::load_file_extractor(path);
  throw std::invalid_argument("unknown extractor kind: " + kind);
}

nlohmann::ordered_json default_config_json() {
  return RunConfig{}.to_json();
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["global_seed"] = global_seed;

  nlohmann::ordered_json p;
  p["gt_dir"] = paths.gt_dir.string();
  p["semantic_mask_dir"] = paths.semantic_mask_dir.string();
  auto& dirs = p["sr_dirs"] = nlohmann::ordered_json::array();
  for (const auto& d : paths.sr_dirs) dirs.push_back(d.string());
  p["out_dir"] = paths.out_dir.string();
  j["paths"] = std::move(p);

  j["degrade"] = build.degrade.to_json();

  nlohmann::ordered_json s;
  s["n_samples"] = build.n_samples;
  s["image_size"] = build.image_size;
  s["mixture"] = {{"rect", build.mixture.rect},
                  {"freeform", build.mixture.freeform},
                  {"semantic", build.mixture.semantic}};
  s["coverage"] = {build.coverage.first, build.coverage.second};
  s["freeform"] = build.freeform.to_json();
  s["splits"] = {{"train", build.splits.train}, {"val", build.splits.val}, {"test", build.splits.test}};
  auto& pool = s["pool_generators"] = nlohmann::ordered_json::array();
  for (const auto& g : build.pool_generators) {
    nlohmann::ordered_json e;
    e["seed"] = g.seed;
    e["width"] = g.width;
    e["blocks"] = g.blocks;
    e["pretrain_steps"] = g.pretrain_steps;
    e["pretrain_lr"] = g.pretrain_lr;
    pool.push_back(std::move(e));
  }
  j["synth"] = std::move(s);

  nlohmann::ordered_json g;
  g["alpha"] = alpha;
  nlohmann::ordered_json e;
  e["kind"] = extractor.kind;
  e["seed"] = extractor.seed;
  e["dim"] = extractor.dim;
  e["path"] = extractor.path.string();
  g["extractor"] = std::move(e);
  j["gtpdm"] = std::move(g);

  j["rm"] = rm.to_json();

  nlohmann::ordered_json l;
  l["lambda_map"] = loss_weights.lambda_map;
  l["lambda_rank"] = loss_weights.lambda_rank;
  l["lambda_align"] = loss_weights.lambda_align;
  l["m1"] = loss_weights.m1;
  l["m2"] = loss_weights.m2;
  l["steps"] = rm_train.steps;
  l["batch_size"] = rm_train.batch_size;
  l["lr"] = rm_train.lr;
  l["grad_log_every"] = rm_train.grad_log_every;
  j["losses"] = std::move(l);

  j["ccl"] = ccl.to_json();
  j["generator"] = generator.to_json();
  j["refl"] = refl.to_json();

  nlohmann::ordered_json ev;
  ev["thresholds"] = eval.thresholds.to_json();
  ev["high_mgt_quantile"] = eval.high_mgt_quantile;
  ev["smooth_window"] = eval.smooth_window;
  ev["early_frac"] = eval.early_frac;
  ev["tiny_coverage"] = {eval.tiny_coverage.first, eval.tiny_coverage.second};
  ev["structure_block"] = eval.structure_block;
  ev["probe_samples"] = eval.probe_samples;
  ev["probe_steps"] = eval.probe_steps;
  ev["overlay_samples"] = eval.overlay_samples;
  j["eval"] = std::move(ev);
  return j;
}

namespace {

// Every key in `given` must exist in `schema` with a structurally compatible
// value; arrays of objects are checked element-wise against the schema's
// first element (or a provided element schema for empty defaults).
void check_unknown_keys(const nlohmann::json& given, const nlohmann::json& schema,
                        const std::string& path) {
  if (!given.is_object()) return;
  if (!schema.is_object())
    throw std::invalid_argument("config: unexpected object at " + (path.empty() ? "<root>" : path));
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string child = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key()))
      throw std::invalid_argument("config: unknown key: " + child);
    const auto& sv = schema.at(it.key());
    if (it.value().is_object()) {
      check_unknown_keys(it.value(), sv, child);
    } else if (it.value().is_array() && sv.is_array() && !sv.empty() && sv.front().is_object()) {
      for (const auto& el : it.value()) check_unknown_keys(el, sv.front(), child + "[]");
    }
  }
}

void deep_merge(nlohmann::ordered_json& base, const nlohmann::json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      deep_merge(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

void apply_override(nlohmann::ordered_json& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must be dotted.key=value: " + spec);
  const std::string keypath = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // bare strings stay strings

  nlohmann::ordered_json* node = &cfg;
  size_t pos = 0;
  while (true) {
    const size_t dot = keypath.find('.', pos);
    const std::string key = keypath.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (key.empty()) throw std::invalid_argument("bad override key: " + keypath);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object())
      throw std::invalid_argument("override path not an object: " + keypath);
    node = &(*node)[key];
    pos = dot + 1;
  }
}

std::pair<double, double> pair_of(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

RunConfig materialize(const nlohmann::ordered_json& j) {
  RunConfig c;
  c.global_seed = j.at("global_seed").get<std::uint64_t>();

  const auto& p = j.at("paths");
  c.paths.gt_dir = p.at("gt_dir").get<std::string>();
  c.paths.semantic_mask_dir = p.at("semantic_mask_dir").get<std::string>();
  c.paths.out_dir = p.at("out_dir").get<std::string>();
  c.paths.sr_dirs.clear();
  for (const auto& d : p.at("sr_dirs")) c.paths.sr_dirs.emplace_back(d.get<std::string>());

  c.build.degrade = degrade::DegradeProfile::from_json(j.at("degrade"));

  const auto& s = j.at("synth");
  c.build.n_samples = s.at("n_samples").get<int>();
  c.build.image_size = s.at("image_size").get<int>();
  c.build.mixture.rect = s.at("mixture").at("rect").get<double>();
  c.build.mixture.freeform = s.at("mixture").at("freeform").get<double>();
  c.build.mixture.semantic = s.at("mixture").at("semantic").get<double>();
  c.build.coverage = pair_of(s.at("coverage"));
  c.build.freeform = synth::FreeformParams::from_json(s.at("freeform"));
  c.build.splits.train = s.at("splits").at("train").get<double>();
  c.build.splits.val = s.at("splits").at("val").get<double>();
  c.build.splits.test = s.at("splits").at("test").get<double>();
  c.build.pool_generators.clear();
  for (const auto& e : s.at("pool_generators")) {
    fgrstore::PoolGeneratorSpec g;
    g.seed = e.at("seed").get<std::uint64_t>();
    g.width = e.at("width").get<int>();
    g.blocks = e.at("blocks").get<int>();
    g.pretrain_steps = e.at("pretrain_steps").get<int>();
    g.pretrain_lr = e.at("pretrain_lr").get<double>();
    c.build.pool_generators.push_back(g);
  }
  c.build.sr_dirs = c.paths.sr_dirs;

  const auto& g = j.at("gtpdm");
  c.alpha = g.at("alpha").get<double>();
  c.build.alpha = c.alpha;
  c.extractor.kind = g.at("extractor").at("kind").get<std::string>();
  c.extractor.seed = g.at("extractor").at("seed").get<std::uint64_t>();
  c.extractor.dim = g.at("extractor").at("dim").get<int>();
  c.extractor.path = g.at("extractor").at("path").get<std::string>();

  c.rm = rm::LadderConfig::from_json(j.at("rm"));

  const auto& l = j.at("losses");
  c.loss_weights.lambda_map = l.at("lambda_map").get<double>();
  c.loss_weights.lambda_rank = l.at("lambda_rank").get<double>();
  c.loss_weights.lambda_align = l.at("lambda_align").get<double>();
  c.loss_weights.m1 = l.at("m1").get<double>();
  c.loss_weights.m2 = l.at("m2").get<double>();
  c.loss_weights.validate();
  c.rm_train.steps = l.at("steps").get<int>();
  c.rm_train.batch_size = l.at("batch_size").get<int>();
  c.rm_train.lr = l.at("lr").get<double>();
  c.rm_train.grad_log_every = l.at("grad_log_every").get<int>();
  c.rm_train.seed = core::mix_seed(c.global_seed, "rm_train");

  c.ccl = ccl::CclConfig::from_json(j.at("ccl"));
  c.ccl.validate(c.rm.top_stage());

  c.generator = refl::GeneratorConfig::from_json(j.at("generator"));
  c.refl = refl::ReflConfig::from_json(j.at("refl"));

  const auto& ev = j.at("eval");
  c.eval.thresholds = evalkit::EvalThresholds::from_json(ev.at("thresholds"));
  c.eval.high_mgt_quantile = ev.at("high_mgt_quantile").get<double>();
  c.eval.smooth_window = ev.at("smooth_window").get<int>();
  c.eval.early_frac = ev.at("early_frac").get<double>();
  c.eval.tiny_coverage = pair_of(ev.at("tiny_coverage"));
  c.eval.structure_block = ev.at("structure_block").get<int>();
  c.eval.probe_samples = ev.at("probe_samples").get<int>();
  c.eval.probe_steps = ev.at("probe_steps").get<int>();
  c.eval.overlay_samples = ev.at("overlay_samples").get<int>();
  return c;
}

}  // namespace

RunConfig load_config(const std::optional<fs::path>& file,
                      const std::vector<std::string>& overrides) {
  nlohmann::ordered_json cfg = default_config_json();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw std::runtime_error("cannot open config: " + file->string());
    nlohmann::json user = nlohmann::json::parse(in);
    check_unknown_keys(user, cfg, "");
    deep_merge(cfg, user);
  }
  for (const auto& ov : overrides) apply_override(cfg, ov);
  check_unknown_keys(cfg, default_config_json(), "");

  // The output root may be overridden by the environment.
  if (const char* env = std::getenv("PERCEP_OUT_DIR"); env && *env)
    cfg["paths"]["out_dir"] = std::string(env);
  return materialize(cfg);
}

std::string RunConfig::config_hash() const {
  nlohmann::ordered_json j = to_json();
  j["paths"].erase("out_dir");
  return core::hash_string_hex(j.dump()).substr(0, 12);
}

fs::path RunConfig::dataset_dir() const {
  return paths.out_dir / ("dataset-" + config_hash() + "-s" + std::to_string(global_seed));
}
fs::path RunConfig::rm_dir() const {
  return paths.out_dir / ("rm-" + config_hash() + "-s" + std::to_string(global_seed));
}
fs::path RunConfig::gen_dir() const {
  return paths.out_dir / ("gen-" + config_hash() + "-s" + std::to_string(global_seed));
}
fs::path RunConfig::eval_dir() const {
  return paths.out_dir / ("eval-" + config_hash() + "-s" + std::to_string(global_seed));
}

void RunConfig::write_snapshot(const fs::path& run_dir) const {
  fs::create_directories(run_dir);
  std::ofstream out(run_dir / "config_snapshot.json", std::ios::binary | std::ios::trunc);
  out << to_json().dump(2) << "\n";
}

}  // namespace percep::cli
