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

#include "percep/cli/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>

#include "percep/core/hash.hpp"
#include "percep/core/imageops.hpp"
#include "percep/core/io.hpp"
#include "percep/core/procgen.hpp"
#include "percep/evalkit/evalkit.hpp"

namespace percep::cli {

namespace {

int env_workers() {
  if (const char* env = std::getenv("PERCEP_WORKERS"); env && *env) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

/// (lr, gt) pairs derived from a split's stored GT images with seeded
/// degradation recipes; the generator trains and probes on these.
refl::PairedBatchSet paired_set(const fgrstore::DatasetView& view,
                                const degrade::DegradeProfile& profile, std::uint64_t seed,
                                int limit = -1) {
  refl::PairedBatchSet set;
  const size_t n = limit < 0 ? view.size() : std::min<size_t>(view.size(), static_cast<size_t>(limit));
  for (size_t i = 0; i < n; ++i) {
    const auto t = view.load(i);
    const auto recipe =
        degrade::sample_recipe(core::mix_seed(seed, t.sample_id), profile);
    set.lr.push_back(degrade::apply_pipeline(t.gt, recipe).chw);
    set.gt.push_back(t.gt.chw);
  }
  return set;
}

}  // namespace

int cmd_gen_data(const RunConfig& cfg, int n_images, int n_masks, int size, std::ostream& out) {
  std::filesystem::create_directories(cfg.paths.gt_dir);
  std::filesystem::create_directories(cfg.paths.semantic_mask_dir);
  for (int i = 0; i < n_images; ++i) {
    core::Image img = core::make_texture_image(core::mix_seed(cfg.global_seed, "demo_gt") + i,
                                               size, size);
    char name[32];
    std::snprintf(name, sizeof(name), "gt_%04d.png", i);
    core::write_image_png16(cfg.paths.gt_dir / name, img);
  }
  for (int i = 0; i < n_masks; ++i) {
    core::Mask m = core::make_blob_mask(core::mix_seed(cfg.global_seed, "demo_mask") + i, size,
                                        size, {0.08, 0.3});
    char name[32];
    std::snprintf(name, sizeof(name), "mask_%04d.png", i);
    core::write_mask_png(cfg.paths.semantic_mask_dir / name, m);
  }
  out << "wrote " << n_images << " gt images to " << cfg.paths.gt_dir.string() << "\n";
  out << "wrote " << n_masks << " semantic masks to " << cfg.paths.semantic_mask_dir.string()
      << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  const auto dir = cfg.dataset_dir();
  std::filesystem::create_directories(dir);
  cfg.write_snapshot(dir);

  auto extractor = cfg.extractor.make();
  extractor->save(dir / "extractor.ckpt");

  fgrstore::BuildConfig build = cfg.build;
  build.workers = env_workers();
  const fgrstore::Manifest manifest = fgrstore::build_dataset(
      cfg.paths.gt_dir, cfg.paths.semantic_mask_dir, build, *extractor, cfg.global_seed, dir);

  size_t n_train = 0, n_val = 0, n_test = 0;
  for (const auto& r : manifest.records) {
    if (r.split == "train") ++n_train;
    else if (r.split == "val") ++n_val;
    else ++n_test;
  }
  out << "dataset: " << dir.string() << "\n";
  out << "records: " << manifest.records.size() << " (train " << n_train << ", val " << n_val
      << ", test " << n_test << ")\n";
  out << "manifest_hash: " << core::hash_file_hex(dir / "manifest") << "\n";
  return 0;
}

namespace {

/// Expand from the previous rung and verify the carry-over blocks bitwise.
rm::RewardModel expand_checked(const rm::RewardModel& prev, std::ostream& out) {
  rm::RewardModel next = rm::RewardModel::expand(prev);
  size_t verbatim = 0, widened = 0;
  for (const auto& [name, v] : prev.params()) {
    const auto nv = next.params().find(name);
    if (!nv) throw std::logic_error("expand dropped parameter " + name);
    if (nv->val.same_shape(v->val)) {
      for (std::int64_t i = 0; i < v->val.numel(); ++i)
        if (nv->val[i] != v->val[i])
          throw std::logic_error("expand changed carried parameter " + name);
      ++verbatim;
    } else {
      ++widened;
    }
  }
  out << "expand: stage " << prev.stage() << " -> " << next.stage() << ", carried " << verbatim
      << " tensors verbatim, widened " << widened << ", params " << prev.parameter_count()
      << " -> " << next.parameter_count() << "\n";
  return next;
}

void train_stage(rm::RewardModel& model, const rm::RewardModel& base,
                 const fgrstore::DatasetView& train, const losses::LossWeights& w,
                 const losses::TrainRmOptions& opt, const std::filesystem::path& log_path,
                 std::ostream& out) {
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  const auto reports = losses::train_rm(model, base, train, w, opt, &log);
  if (!reports.empty())
    out << "  trained " << reports.size() << " steps, l_total " << reports.front().l_total
        << " -> " << reports.back().l_total << "\n";
}

}  // namespace

int cmd_train_rm(const RunConfig& cfg, const std::string& stage_sel, std::ostream& out) {
  const auto dataset = cfg.dataset_dir();
  const auto dir = cfg.rm_dir();
  std::filesystem::create_directories(dir);
  cfg.write_snapshot(dir);

  const int top = cfg.rm.top_stage();
  int from = 0, to = top;
  if (stage_sel != "all") {
    from = to = std::stoi(stage_sel);
    if (from < 0 || from > top) throw std::invalid_argument("stage out of range: " + stage_sel);
  }

  std::optional<fgrstore::Manifest> manifest;
  std::optional<fgrstore::DatasetView> train;
  auto need_data = [&]() -> const fgrstore::DatasetView& {
    if (!train) {
      manifest = fgrstore::Manifest::load(dataset / "manifest");
      train = fgrstore::load_split(*manifest, dataset, "train");
    }
    return *train;
  };

  for (int stage = from; stage <= to; ++stage) {
    const auto ckpt = ccl::stage_checkpoint_path(dir, ccl::Mode::param, stage);
    if (stage == 0) {
      rm::RewardModel base = rm::RewardModel::init_stage0(cfg.rm);
      base.save(ckpt);
      out << "stage 0: frozen base emitted (no gradient steps), params "
          << base.parameter_count() << "\n";
      out << "checkpoint: " << ckpt.string() << " hash " << core::hash_file_hex(ckpt) << "\n";
      continue;
    }
    const auto prev_ckpt = ccl::stage_checkpoint_path(dir, ccl::Mode::param, stage - 1);
    if (!std::filesystem::exists(prev_ckpt))
      throw std::runtime_error("missing previous stage checkpoint: " + prev_ckpt.string() +
                               " (run train-rm for stage " + std::to_string(stage - 1) + ")");
    rm::RewardModel prev = rm::RewardModel::load(prev_ckpt);
    rm::RewardModel model = expand_checked(prev, out);
    rm::RewardModel base = rm::RewardModel::load(ccl::stage_checkpoint_path(dir, ccl::Mode::param, 0));

    losses::TrainRmOptions opt = cfg.rm_train;
    opt.seed = core::mix_seed(cfg.rm_train.seed, static_cast<std::uint64_t>(stage));
    out << "stage " << stage << ": training " << opt.steps << " steps\n";
    train_stage(model, base, need_data(), cfg.loss_weights, opt,
                dir / ("rm_stage" + std::to_string(stage) + ".log.jsonl"), out);
    model.save(ckpt);
    out << "checkpoint: " << ckpt.string() << " hash " << core::hash_file_hex(ckpt) << "\n";
  }

  // Weight-ramp variant: architecture fixed at full size, map/rank weights
  // grow per stage.
  if (cfg.ccl.mode == ccl::Mode::weight && (stage_sel == "all" || from >= 1)) {
    rm::RewardModel base =
        rm::RewardModel::load(ccl::stage_checkpoint_path(dir, ccl::Mode::param, 0));
    rm::RewardModel model = rm::RewardModel::init_stage0(cfg.rm);
    while (model.stage() < top) model = rm::RewardModel::expand(model);
    for (int k = 1; k <= top; ++k) {
      losses::LossWeights w = cfg.loss_weights;
      w.lambda_map = cfg.ccl.weight_ramp[static_cast<size_t>(k - 1)][0];
      w.lambda_rank = cfg.ccl.weight_ramp[static_cast<size_t>(k - 1)][1];
      losses::TrainRmOptions opt = cfg.rm_train;
      opt.steps = cfg.ccl.rm_refine_steps;
      opt.seed = core::mix_seed(cfg.rm_train.seed, "weight_ramp_" + std::to_string(k));
      out << "weight-ramp stage " << k << ": lambda_map " << w.lambda_map << ", lambda_rank "
          << w.lambda_rank << "\n";
      train_stage(model, base, need_data(), w, opt,
                  dir / ("rm_weight_stage" + std::to_string(k) + ".log.jsonl"), out);
      const auto ckpt = ccl::stage_checkpoint_path(dir, ccl::Mode::weight, k);
      model.save(ckpt);
      out << "checkpoint: " << ckpt.string() << " hash " << core::hash_file_hex(ckpt) << "\n";
    }
  }
  return 0;
}

int cmd_train_gen(const RunConfig& cfg, std::ostream& out) {
  const auto dataset = cfg.dataset_dir();
  const auto dir = cfg.gen_dir();
  std::filesystem::create_directories(dir);
  cfg.write_snapshot(dir);

  const auto manifest = fgrstore::Manifest::load(dataset / "manifest");
  const auto train = fgrstore::load_split(manifest, dataset, "train");
  const auto val = fgrstore::load_split(manifest, dataset, "val");

  const auto train_pairs =
      paired_set(train, cfg.build.degrade, core::mix_seed(cfg.global_seed, "gen_lr"));
  const auto probe_pairs = paired_set(val, cfg.build.degrade,
                                      core::mix_seed(cfg.global_seed, "gen_probe"),
                                      cfg.eval.probe_samples);

  auto segments = ccl::plan_segments(cfg.ccl, cfg.rm.top_stage(), cfg.rm_dir());
  ccl::RewardSourceCache sources;
  if (cfg.ccl.mode == ccl::Mode::param) sources.check_monotone_capacity(segments);

  refl::GeneratorConfig gc = cfg.generator;
  gc.seed = core::mix_seed(cfg.global_seed, core::mix_seed(gc.seed, "curriculum_gen"));
  gc.scale = cfg.build.degrade.scale;
  refl::ToyGenerator gen = refl::ToyGenerator::init(gc);

  refl::ReflConfig rc = cfg.refl;
  rc.seed = core::mix_seed(cfg.global_seed, "refl");

  std::ofstream log(dir / "curriculum.log.jsonl", std::ios::binary | std::ios::trunc);
  const auto state = ccl::make_state(cfg.ccl, segments);
  const auto run = refl::run_curriculum(gen, train_pairs, probe_pairs, state, sources, rc, &log);

  const auto ckpt = dir / "generator.ckpt";
  gen.save(ckpt);
  out << "mode: " << ccl::mode_name(cfg.ccl.mode) << ", segments: " << segments.size() << "\n";
  for (const auto& tr : run.transitions)
    out << "transition at step " << tr.step << ": stage " << tr.from_stage << " -> "
        << tr.to_stage << ", probe drift " << tr.drift << "\n";
  if (!run.steps.empty())
    out << "reward: " << run.steps.front().mean_reward << " -> " << run.steps.back().mean_reward
        << "\n";
  out << "checkpoint: " << ckpt.string() << " hash " << core::hash_file_hex(ckpt) << "\n";
  return 0;
}

namespace {

std::vector<double> rewards_from_log(const std::filesystem::path& p,
                                     std::vector<double>* drifts = nullptr) {
  std::vector<double> rewards;
  std::ifstream in(p);
  if (!in) return rewards;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    if (j.contains("reward")) rewards.push_back(j["reward"].get<double>());
    if (drifts && j.contains("drift")) drifts->push_back(j["drift"].get<double>());
  }
  return rewards;
}

}  // namespace

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const auto dataset = cfg.dataset_dir();
  const auto dir = cfg.eval_dir();
  std::filesystem::create_directories(dir);
  cfg.write_snapshot(dir);

  const auto manifest = fgrstore::Manifest::load(dataset / "manifest");
  const auto test = fgrstore::load_split(manifest, dataset, "test");

  evalkit::ReportInputs inputs;
  inputs.thresholds = cfg.eval.thresholds;

  const auto base_ckpt = ccl::stage_checkpoint_path(cfg.rm_dir(), ccl::Mode::param, 0);
  const auto top_ckpt =
      ccl::stage_checkpoint_path(cfg.rm_dir(), ccl::Mode::param, cfg.rm.top_stage());
  std::optional<rm::RewardModel> base, topm;
  if (std::filesystem::exists(base_ckpt)) base = rm::RewardModel::load(base_ckpt);
  if (std::filesystem::exists(top_ckpt)) topm = rm::RewardModel::load(top_ckpt);

  auto extractor = gtpdm::load_file_extractor(dataset / "extractor.ckpt");

  if (topm) {
    inputs.report.rank_accuracy = evalkit::rank_accuracy(*topm, test);
    inputs.report.pdm_auc = evalkit::mean_pdm_auc(*topm, test);
    out << "rank_accuracy: " << *inputs.report.rank_accuracy << "\n";
    out << "pdm_auc: " << *inputs.report.pdm_auc << "\n";

    // Score distributions over the held-out split.
    std::vector<double> s_gt, s_syn, s_sr;
    for (size_t i = 0; i < test.size(); ++i) {
      const auto t = test.load(i);
      s_sr.push_back(topm->forward(t.sr).score);
      s_syn.push_back(topm->forward(t.syn).score);
      s_gt.push_back(topm->forward(t.gt).score);
    }
    inputs.score_sets = {{"s_sr", s_sr}, {"s_syn", s_syn}, {"s_gt", s_gt}};

    for (int i = 0; i < cfg.eval.overlay_samples && i < static_cast<int>(test.size()); ++i) {
      const auto t = test.load(static_cast<size_t>(i));
      const auto o = topm->forward(t.syn);
      inputs.overlays.push_back({t.sample_id, t.syn, *o.map});
    }
  }
  if (base && topm) {
    for (int stage = 1; stage <= cfg.rm.top_stage(); ++stage) {
      const auto ck = ccl::stage_checkpoint_path(cfg.rm_dir(), ccl::Mode::param, stage);
      if (!std::filesystem::exists(ck)) continue;
      const auto m = rm::RewardModel::load(ck);
      inputs.report.anchor_drift_per_stage.push_back(evalkit::anchor_drift(m, *base, test));
    }
    const auto tiny = evalkit::make_tiny_swap_triplets(test, cfg.eval.tiny_coverage,
                                                       core::mix_seed(cfg.global_seed, "tiny"),
                                                       *extractor, cfg.alpha);
    inputs.report.tiny_rank_base = evalkit::rank_accuracy(*base, tiny);
    inputs.report.tiny_rank_top = evalkit::rank_accuracy(*topm, tiny);
    out << "tiny-swap rank accuracy: base " << *inputs.report.tiny_rank_base << ", top "
        << *inputs.report.tiny_rank_top << "\n";

    // Hacking probe: identical training except for the reward source.
    evalkit::HackingProbeInputs probe;
    probe.gen_template = cfg.generator;
    probe.gen_template.seed = core::mix_seed(cfg.global_seed, "probe_gen");
    probe.gen_template.scale = cfg.build.degrade.scale;
    const auto train = fgrstore::load_split(manifest, dataset, "train");
    probe.train = paired_set(train, cfg.build.degrade, core::mix_seed(cfg.global_seed, "gen_lr"));
    probe.probe = paired_set(test, cfg.build.degrade,
                             core::mix_seed(cfg.global_seed, "probe_pairs"),
                             cfg.eval.probe_samples);
    for (size_t i = 0; i < probe.probe.size(); ++i) probe.probe_mgt.push_back(test.load(i).m_gt);
    probe.mgt_quantile = cfg.eval.high_mgt_quantile;
    refl::ReflConfig pc = cfg.refl;
    pc.steps = cfg.eval.probe_steps;
    pc.seed = core::mix_seed(cfg.global_seed, "probe_refl");
    inputs.report.hacking = evalkit::hacking_probe(probe, *base, *topm, pc);
    out << "hacking probe: masked error base-trained " << inputs.report.hacking->masked_error_rm0
        << " vs top-trained " << inputs.report.hacking->masked_error_rmN << "\n";
  } else {
    out << "hacking probe skipped: missing "
        << (base ? top_ckpt.string() : base_ckpt.string()) << "\n";
  }

  // Curriculum curves from the generator run, when present.
  {
    std::vector<double> drifts;
    const auto rewards = rewards_from_log(cfg.gen_dir() / "curriculum.log.jsonl", &drifts);
    if (!rewards.empty()) {
      inputs.reward_curves.push_back({"curriculum", rewards});
      inputs.report.curves.push_back(
          {"curriculum",
           evalkit::curve_stats(rewards, cfg.eval.smooth_window, cfg.eval.early_frac)});
      inputs.report.transition_drifts = drifts;
    }
  }

  const auto files = evalkit::emit_report(inputs, dir);
  for (const auto& f : files) out << "wrote " << f.string() << "\n";
  const bool pass = inputs.report.all_pass(cfg.eval.thresholds);
  out << (pass ? "PASS" : "FAIL") << " (thresholds)\n";
  return pass ? 0 : 3;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  const auto dir = cfg.eval_dir();
  std::filesystem::create_directories(dir / "plots");

  evalkit::ReportInputs inputs;
  inputs.thresholds = cfg.eval.thresholds;

  // Rebuild plots from stored logs; keep the existing summary if present.
  const auto rewards = rewards_from_log(cfg.gen_dir() / "curriculum.log.jsonl");
  if (!rewards.empty()) {
    inputs.reward_curves.push_back({"curriculum", rewards});
    inputs.report.curves.push_back(
        {"curriculum", evalkit::curve_stats(rewards, cfg.eval.smooth_window, cfg.eval.early_frac)});
  }

  const auto dataset = cfg.dataset_dir();
  const auto top_ckpt =
      ccl::stage_checkpoint_path(cfg.rm_dir(), ccl::Mode::param, cfg.rm.top_stage());
  if (std::filesystem::exists(dataset / "manifest") && std::filesystem::exists(top_ckpt)) {
    const auto manifest = fgrstore::Manifest::load(dataset / "manifest");
    const auto test = fgrstore::load_split(manifest, dataset, "test");
    const auto topm = rm::RewardModel::load(top_ckpt);
    for (int i = 0; i < cfg.eval.overlay_samples && i < static_cast<int>(test.size()); ++i) {
      const auto t = test.load(static_cast<size_t>(i));
      const auto o = topm.forward(t.syn);
      inputs.overlays.push_back({t.sample_id, t.syn, *o.map});
    }
  }

  const auto summary_path = dir / "summary.json";
  const bool had_summary = std::filesystem::exists(summary_path);
  std::string old_summary;
  if (had_summary) {
    std::ifstream in(summary_path, std::ios::binary);
    old_summary.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const auto files = evalkit::emit_report(inputs, dir);
  if (had_summary) {
    std::ofstream o(summary_path, std::ios::binary | std::ios::trunc);
    o << old_summary;
  }
  for (const auto& f : files) out << "wrote " << f.string() << "\n";
  return 0;
}

}  // namespace percep::cli
