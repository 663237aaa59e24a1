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

#include "percep/fgrstore/fgrstore.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "percep/core/hash.hpp"
#include "percep/core/imageops.hpp"
#include "percep/core/io.hpp"
#include "percep/nn/adam.hpp"

namespace percep::fgrstore {

namespace {

struct GeneratorSource final : SrSource {
  refl::ToyGenerator gen;
  explicit GeneratorSource(refl::ToyGenerator g) : gen(std::move(g)) {}
  Image make_sr(const Image& gt, const Image& lr, const std::string&) const override {
    Image sr = gen.upscale(lr);
    if (!sr.chw.same_shape(gt.chw))
      throw std::runtime_error("generator source: scale does not restore GT resolution");
    sr.chw = core::quantize_u16_grid(std::move(sr.chw));
    return sr;
  }
  std::string id() const override { return gen.id(); }
};

struct DirectorySource final : SrSource {
  fs::path dir;
  explicit DirectorySource(fs::path d) : dir(std::move(d)) {}
  Image make_sr(const Image& gt, const Image&, const std::string& stem) const override {
    const fs::path p = dir / (stem + ".png");
    Image sr = core::read_image(p);
    if (!sr.chw.same_shape(gt.chw))
      throw std::runtime_error("sr directory source: " + p.string() + " does not match GT shape");
    sr.chw = core::quantize_u16_grid(std::move(sr.chw));
    return sr;
  }
  std::string id() const override { return "dir/" + dir.filename().string(); }
};

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp")
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string sample_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%06d", i);
  return buf;
}

}  // namespace

std::unique_ptr<SrSource> make_generator_source(refl::ToyGenerator gen) {
  return std::make_unique<GeneratorSource>(std::move(gen));
}

std::unique_ptr<SrSource> make_directory_source(const fs::path& dir) {
  return std::make_unique<DirectorySource>(dir);
}

void MaskMixture::validate() const {
  if (rect < 0 || freeform < 0 || semantic < 0 || rect + freeform + semantic <= 0)
    throw std::invalid_argument("mask mixture: weights must be nonnegative and not all zero");
}

void SplitSpec::validate() const {
  if (train < 0 || val < 0 || test < 0 || train + val + test <= 0)
    throw std::invalid_argument("splits: fractions must be nonnegative and not all zero");
}

nlohmann::ordered_json BuildConfig::to_json() const {
  nlohmann::ordered_json j;
  j["n_samples"] = n_samples;
  j["image_size"] = image_size;
  j["alpha"] = alpha;
  j["mixture"] = {{"rect", mixture.rect}, {"freeform", mixture.freeform}, {"semantic", mixture.semantic}};
  j["coverage"] = {coverage.first, coverage.second};
  j["freeform"] = freeform.to_json();
  j["degrade"] = degrade.to_json();
  j["splits"] = {{"train", splits.train}, {"val", splits.val}, {"test", splits.test}};
  auto& pool = j["pool_generators"] = nlohmann::ordered_json::array();
  for (const auto& p : pool_generators) {
    nlohmann::ordered_json e;
    e["seed"] = p.seed;
    e["width"] = p.width;
    e["blocks"] = p.blocks;
    e["pretrain_steps"] = p.pretrain_steps;
    e["pretrain_lr"] = p.pretrain_lr;
    pool.push_back(std::move(e));
  }
  auto& dirs = j["sr_dirs"] = nlohmann::ordered_json::array();
  for (const auto& d : sr_dirs) dirs.push_back(d.string());
  return j;
}

nlohmann::ordered_json SampleRecord::to_json() const {
  nlohmann::ordered_json j;
  j["sample_id"] = sample_id;
  j["split"] = split;
  j["gt"] = gt_path;
  j["sr"] = sr_path;
  j["syn"] = syn_path;
  j["mask"] = mask_path;
  j["mgt"] = mgt_path;
  j["recipe"] = recipe.to_json();
  j["mask_kind"] = mask_kind;
  j["mask_coverage"] = mask_coverage;
  j["sample_seed"] = sample_seed;
  j["source_model_id"] = source_model_id;
  j["gt_source"] = gt_source;
  j["crop"] = {crop_y, crop_x};
  j["mgt_stats"] = mgt_stats;
  return j;
}

SampleRecord SampleRecord::from_json(const nlohmann::ordered_json& j) {
  SampleRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.split = j.at("split").get<std::string>();
  r.gt_path = j.at("gt").get<std::string>();
  r.sr_path = j.at("sr").get<std::string>();
  r.syn_path = j.at("syn").get<std::string>();
  r.mask_path = j.at("mask").get<std::string>();
  r.mgt_path = j.at("mgt").get<std::string>();
  r.recipe = degrade::DegradationRecipe::from_json(j.at("recipe"));
  r.mask_kind = j.at("mask_kind").get<std::string>();
  r.mask_coverage = j.at("mask_coverage").get<double>();
  r.sample_seed = j.at("sample_seed").get<std::uint64_t>();
  r.source_model_id = j.at("source_model_id").get<std::string>();
  r.gt_source = j.value("gt_source", "");
  if (j.contains("crop")) {
    r.crop_y = j["crop"][0].get<int>();
    r.crop_x = j["crop"][1].get<int>();
  }
  r.mgt_stats = j.value("mgt_stats", nlohmann::ordered_json::object());
  return r;
}

void Manifest::save(const fs::path& path) const {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("manifest save: cannot open " + path.string());
  nlohmann::ordered_json head;
  head["schema_version"] = schema_version;
  head["global_seed"] = global_seed;
  head["extractor_id"] = extractor_id;
  head["alpha"] = alpha;
  head["image_size"] = image_size;
  head["n_records"] = records.size();
  out << head.dump() << "\n";
  for (const auto& r : records) out << r.to_json().dump() << "\n";
  if (!out) throw std::runtime_error("manifest save: write failed " + path.string());
}

Manifest Manifest::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("manifest load: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("manifest load: empty file " + path.string());
  const auto head = nlohmann::json::parse(line);
  Manifest m;
  m.schema_version = head.at("schema_version").get<int>();
  if (m.schema_version != 1)
    throw std::runtime_error("manifest load: unsupported schema version");
  m.global_seed = head.at("global_seed").get<std::uint64_t>();
  m.extractor_id = head.at("extractor_id").get<std::string>();
  m.alpha = head.at("alpha").get<double>();
  m.image_size = head.at("image_size").get<int>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    m.records.push_back(SampleRecord::from_json(nlohmann::ordered_json::parse(line)));
  }
  if (m.records.size() != head.at("n_records").get<size_t>())
    throw std::runtime_error("manifest load: record count mismatch in " + path.string());
  m.validate_unique_ids();
  return m;
}

void Manifest::validate_unique_ids() const {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.sample_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::runtime_error("manifest: duplicate sample ids");
}

bool triplet_swap_consistent(const SampleTriplet& t) {
  const Image recomputed = synth::region_swap(t.gt, t.sr, t.mask);
  for (std::int64_t i = 0; i < t.syn.chw.numel(); ++i)
    if (recomputed.chw[i] != t.syn.chw[i]) return false;
  return true;
}

namespace {

struct GtCorpus {
  std::vector<fs::path> files;
  std::vector<Image> images;  // preloaded, u16 grid
};

GtCorpus load_gt_corpus(const fs::path& gt_dir, int image_size) {
  GtCorpus corpus;
  corpus.files = list_images(gt_dir);
  if (corpus.files.empty())
    throw std::runtime_error("gt dir has no images: " + gt_dir.string());
  for (const auto& f : corpus.files) {
    Image img = core::read_image(f);
    if (img.channels() != 3)
      throw std::runtime_error("gt image must be RGB: " + f.string());
    if (img.height() < image_size || img.width() < image_size)
      throw std::runtime_error("gt image smaller than sample size: " + f.string());
    img.chw = core::quantize_u16_grid(std::move(img.chw));
    corpus.images.push_back(std::move(img));
  }
  return corpus;
}

Image crop(const Image& img, int y0, int x0, int size) {
  Image out = Image::zeros(img.channels(), size, size);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
  return out;
}

refl::ToyGenerator pretrain_pool_generator(const PoolGeneratorSpec& spec, const GtCorpus& corpus,
                                           const degrade::DegradeProfile& profile, int image_size,
                                           std::uint64_t global_seed) {
  refl::GeneratorConfig gc;
  gc.seed = core::mix_seed(global_seed, core::mix_seed(spec.seed, "poolgen"));
  gc.scale = profile.scale;
  gc.width = spec.width;
  gc.blocks = spec.blocks;
  refl::ToyGenerator gen = refl::ToyGenerator::init(gc);
  if (spec.pretrain_steps <= 0) return gen;

  gen.params().set_requires_grad(true);
  nn::Adam opt(spec.pretrain_lr);
  core::Rng rng(core::mix_seed(gc.seed, "pretrain"));
  for (int step = 0; step < spec.pretrain_steps; ++step) {
    const auto& img = corpus.images[static_cast<size_t>(
        rng.uniform_int(static_cast<std::int64_t>(corpus.images.size())))];
    const int y0 = static_cast<int>(rng.uniform_int(img.height() - image_size + 1));
    const int x0 = static_cast<int>(rng.uniform_int(img.width() - image_size + 1));
    Image gt = crop(img, y0, x0, image_size);
    const auto recipe = degrade::sample_recipe(rng.next_u64(), profile);
    Image lr = degrade::apply_pipeline(gt, recipe);
    nn::Var sr = gen.forward(nn::constant(lr.chw));
    nn::Var loss = nn::mse_loss(sr, nn::constant(gt.chw));
    nn::backward(loss);
    opt.step(gen.params());
  }
  gen.params().set_requires_grad(false);
  return gen;
}

}  // namespace

Manifest build_dataset(const fs::path& gt_dir, const fs::path& semantic_mask_dir,
                       const BuildConfig& cfg, const gtpdm::FeatureExtractor& extractor,
                       std::uint64_t global_seed, const fs::path& out_dir) {
  cfg.mixture.validate();
  cfg.splits.validate();
  cfg.degrade.validate();
  if (cfg.n_samples < 0) throw std::invalid_argument("build_dataset: negative sample count");
  if (cfg.image_size % cfg.degrade.scale != 0)
    throw std::invalid_argument("build_dataset: image_size not divisible by degrade scale");

  GtCorpus corpus;
  std::vector<fs::path> semantic_files;
  std::vector<std::unique_ptr<SrSource>> pool;

  if (cfg.n_samples > 0) {
    corpus = load_gt_corpus(gt_dir, cfg.image_size);
    if (cfg.mixture.semantic > 0) {
      semantic_files = list_images(semantic_mask_dir);
      if (semantic_files.empty())
        throw std::runtime_error("semantic mask dir has no images: " + semantic_mask_dir.string());
    }
    for (size_t gi = 0; gi < cfg.pool_generators.size(); ++gi) {
      refl::ToyGenerator gen = pretrain_pool_generator(cfg.pool_generators[gi], corpus,
                                                       cfg.degrade, cfg.image_size, global_seed);
      gen.save(out_dir / "pool" / ("gen_" + std::to_string(gi) + ".ckpt"));
      pool.push_back(make_generator_source(std::move(gen)));
    }
    for (const auto& d : cfg.sr_dirs) pool.push_back(make_directory_source(d));
    if (pool.empty()) throw std::runtime_error("build_dataset: empty SR source pool");
  }

  for (const char* sub : {"gt", "sr", "syn", "mask", "mgt"})
    fs::create_directories(out_dir / "images" / sub);

  // Deterministic split assignment by seeded permutation.
  std::vector<std::string> split_of(static_cast<size_t>(cfg.n_samples), "train");
  {
    std::vector<size_t> order(static_cast<size_t>(cfg.n_samples));
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    core::Rng srng(core::mix_seed(global_seed, "splits"));
    srng.shuffle(order);
    const double tot = cfg.splits.train + cfg.splits.val + cfg.splits.test;
    const auto n_train = static_cast<size_t>(std::llround(cfg.n_samples * cfg.splits.train / tot));
    const auto n_val = static_cast<size_t>(std::llround(cfg.n_samples * cfg.splits.val / tot));
    for (size_t pos = 0; pos < order.size(); ++pos) {
      split_of[order[pos]] = pos < n_train ? "train" : (pos < n_train + n_val ? "val" : "test");
    }
  }

  std::vector<SampleRecord> records(static_cast<size_t>(cfg.n_samples));
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto build_one = [&](int i) {
    const std::uint64_t seed_i = core::mix_seed(global_seed, static_cast<std::uint64_t>(i));
    core::Rng rng(seed_i);

    const auto gt_idx = static_cast<size_t>(
        rng.child("gt_pick").uniform_int(static_cast<std::int64_t>(corpus.images.size())));
    const Image& full = corpus.images[gt_idx];
    core::Rng crng = rng.child("crop");
    const int y0 = static_cast<int>(crng.uniform_int(full.height() - cfg.image_size + 1));
    const int x0 = static_cast<int>(crng.uniform_int(full.width() - cfg.image_size + 1));
    Image gt = crop(full, y0, x0, cfg.image_size);

    const auto recipe = degrade::sample_recipe(rng.child("recipe").seed(), cfg.degrade);
    Image lr = degrade::apply_pipeline(gt, recipe);

    const std::string stem = sample_name(i);
    const auto src_idx = static_cast<size_t>(
        rng.child("src_pick").uniform_int(static_cast<std::int64_t>(pool.size())));
    Image sr = pool[src_idx]->make_sr(gt, lr, stem);

    // Mask kind from the configured mixture.
    Mask mask;
    const double total = cfg.mixture.rect + cfg.mixture.freeform + cfg.mixture.semantic;
    const double u = rng.child("mask_kind").uniform() * total;
    const std::uint64_t mask_seed = rng.child("mask").seed();
    if (u < cfg.mixture.rect) {
      mask = synth::gen_rect_mask(cfg.image_size, cfg.image_size, mask_seed, cfg.coverage);
    } else if (u < cfg.mixture.rect + cfg.mixture.freeform) {
      synth::FreeformParams fp = cfg.freeform;
      fp.coverage = cfg.coverage;
      mask = synth::gen_freeform_mask(cfg.image_size, cfg.image_size, mask_seed, fp);
    } else {
      const auto mi = static_cast<size_t>(core::Rng(mask_seed).uniform_int(
          static_cast<std::int64_t>(semantic_files.size())));
      mask = synth::load_semantic_mask(semantic_files[mi], cfg.image_size, cfg.image_size);
    }

    Image syn = synth::region_swap(gt, sr, mask);
    gtpdm::GroundTruthPdm pdm = gtpdm::build_gt_pdm(syn, gt, extractor, cfg.alpha);
    pdm.grid = core::quantize_u16_grid(std::move(pdm.grid));

    SampleRecord r;
    r.sample_id = stem;
    r.split = split_of[static_cast<size_t>(i)];
    r.gt_path = "images/gt/" + stem + ".png";
    r.sr_path = "images/sr/" + stem + ".png";
    r.syn_path = "images/syn/" + stem + ".png";
    r.mask_path = "images/mask/" + stem + ".png";
    r.mgt_path = "images/mgt/" + stem + ".png";
    r.recipe = recipe;
    r.mask_kind = core::mask_kind_name(mask.kind);
    r.mask_coverage = mask.coverage();
    r.sample_seed = seed_i;
    r.source_model_id = pool[src_idx]->id();
    r.gt_source = corpus.files[gt_idx].filename().string();
    r.crop_y = y0;
    r.crop_x = x0;
    r.mgt_stats["pixel"] = pdm.pixel_stats.to_json();
    r.mgt_stats["feat"] = pdm.feat_stats.to_json();

    core::write_image_png16(out_dir / r.gt_path, gt);
    core::write_image_png16(out_dir / r.sr_path, sr);
    core::write_image_png16(out_dir / r.syn_path, syn);
    core::write_mask_png(out_dir / r.mask_path, mask);
    core::write_map_png16(out_dir / r.mgt_path, pdm.grid);
    records[static_cast<size_t>(i)] = std::move(r);
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1 || cfg.n_samples < 2) {
    for (int i = 0; i < cfg.n_samples; ++i) build_one(i);
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < workers; ++t)
      threads.emplace_back([&, t] {
        for (int i = t; i < cfg.n_samples; i += workers) {
          try {
            build_one(i);
          } catch (...) {
            std::lock_guard<std::mutex> lk(error_mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    for (auto& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  Manifest m;
  m.global_seed = global_seed;
  m.extractor_id = extractor.id();
  m.alpha = cfg.alpha;
  m.image_size = cfg.image_size;
  m.records = std::move(records);
  m.validate_unique_ids();
  m.save(out_dir / "manifest");

  std::ofstream snap(out_dir / "config_snapshot", std::ios::binary | std::ios::trunc);
  nlohmann::ordered_json sj;
  sj["global_seed"] = global_seed;
  sj["extractor_id"] = extractor.id();
  sj["build"] = cfg.to_json();
  snap << sj.dump(2) << "\n";
  return m;
}

DatasetView::DatasetView(fs::path root, std::vector<SampleRecord> records)
    : root_(std::move(root)), records_(std::move(records)) {}

SampleTriplet DatasetView::load(size_t i) const {
  const SampleRecord& r = records_.at(i);
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("sample " + r.sample_id + ": " + what);
  };
  SampleTriplet t;
  t.sample_id = r.sample_id;
  try {
    t.gt = core::read_image(root_ / r.gt_path);
    t.sr = core::read_image(root_ / r.sr_path);
    t.syn = core::read_image(root_ / r.syn_path);
    t.mask = core::read_mask_png(root_ / r.mask_path);
    t.m_gt = core::read_map_png16(root_ / r.mgt_path);
  } catch (const std::exception& e) {
    fail(e.what());
  }
  t.mask.kind = core::mask_kind_from(r.mask_kind);
  t.recipe = r.recipe;
  t.source_model_id = r.source_model_id;
  if (!t.gt.chw.same_shape(t.sr.chw) || !t.gt.chw.same_shape(t.syn.chw)) fail("image shape mismatch");
  if (t.mask.h != t.gt.height() || t.mask.w != t.gt.width()) fail("mask shape mismatch");
  if (t.m_gt.dim(0) != t.gt.height() || t.m_gt.dim(1) != t.gt.width()) fail("map shape mismatch");
  for (std::int64_t k = 0; k < t.m_gt.numel(); ++k)
    if (!(t.m_gt[k] >= 0.0 && t.m_gt[k] <= 1.0)) fail("map value out of range");
  if (!t.gt.valid() || !t.sr.valid() || !t.syn.valid()) fail("image values out of range");
  return t;
}

std::vector<std::vector<size_t>> DatasetView::epoch_batches(int batch_size,
                                                            std::uint64_t shuffle_seed) const {
  if (batch_size < 1) throw std::invalid_argument("epoch_batches: bad batch size");
  std::vector<size_t> order(records_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  core::Rng rng(core::mix_seed(shuffle_seed, "epoch"));
  rng.shuffle(order);
  std::vector<std::vector<size_t>> batches;
  for (size_t i = 0; i < order.size(); i += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(order.size(), i + static_cast<size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

DatasetView load_split(const Manifest& m, const fs::path& dataset_root, const std::string& split) {
  std::vector<SampleRecord> recs;
  for (const auto& r : m.records)
    if (r.split == split) recs.push_back(r);
  if (recs.empty()) throw std::runtime_error("split has no samples: " + split);
  return DatasetView(dataset_root, std::move(recs));
}

}  // namespace percep::fgrstore
