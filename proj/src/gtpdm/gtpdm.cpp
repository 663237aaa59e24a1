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

#include "percep/gtpdm/gtpdm.hpp"

#include <cmath>
#include <stdexcept>

#include "percep/core/imageops.hpp"

namespace percep::gtpdm {

nlohmann::ordered_json MapStats::to_json() const {
  nlohmann::ordered_json j;
  j["min"] = min;
  j["max"] = max;
  j["mean"] = mean;
  return j;
}

namespace {

MapStats stats_of(const Tensor& t) {
  return {core::min_value(t), core::max_value(t), core::mean_value(t)};
}

}  // namespace

Tensor pixel_diff(const Image& syn, const Image& gt) {
  if (!syn.chw.same_shape(gt.chw))
    throw std::invalid_argument("pixel_diff: shape mismatch " + syn.chw.shape_str() + " vs " +
                                gt.chw.shape_str());
  const int c = syn.channels(), h = syn.height(), w = syn.width();
  Tensor out({h, w});
  const double inv = 1.0 / c;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ci = 0; ci < c; ++ci) acc += std::abs(syn.at(ci, y, x) - gt.at(ci, y, x));
      out.at(y, x) = acc * inv;
    }
  return out;
}

Tensor feat_diff(const FeatureMap& f_syn, const FeatureMap& f_gt) {
  if (f_syn.extractor_id != f_gt.extractor_id)
    throw std::invalid_argument("feat_diff: extractor mismatch: " + f_syn.extractor_id + " vs " +
                                f_gt.extractor_id);
  if (!f_syn.grid.same_shape(f_gt.grid))
    throw std::invalid_argument("feat_diff: shape mismatch " + f_syn.grid.shape_str() + " vs " +
                                f_gt.grid.shape_str());
  constexpr double kEpsSq = 1e-24;  // norm floor 1e-12, squared
  const int d = f_syn.grid.dim(0), h = f_syn.grid.dim(1), w = f_syn.grid.dim(2);
  Tensor out({h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double dot = 0.0, na2 = 0.0, nb2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double a = f_syn.grid.at(k, y, x);
        const double b = f_gt.grid.at(k, y, x);
        dot += a * b;
        na2 += a * a;
        nb2 += b * b;
      }
      if (na2 < kEpsSq || nb2 < kEpsSq) {
        out.at(y, x) = 0.0;
        continue;
      }
      // Clamp cos to [-1,1] so identical vectors give exactly 0 and rounding
      // can never push the distance outside [0,2].
      double c;
      if (dot * dot >= na2 * nb2) {
        c = dot > 0.0 ? 1.0 : -1.0;
      } else {
        c = dot / std::sqrt(na2 * nb2);
        c = std::min(1.0, std::max(-1.0, c));
      }
      out.at(y, x) = 1.0 - c;
    }
  return out;
}

Tensor fuse_raw(const Tensor& diff_pixel, const Tensor& diff_feat, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("fuse: alpha out of [0,1]");
  if (diff_pixel.rank() != 2 || diff_feat.rank() != 2)
    throw std::invalid_argument("fuse: expected HW maps");
  const int h = diff_pixel.dim(0), w = diff_pixel.dim(1);

  // Feature diff lives at feature resolution; bring it up to image
  // resolution so the fused map can supervise a full-resolution decoder.
  Tensor feat3({1, diff_feat.dim(0), diff_feat.dim(1)});
  for (std::int64_t i = 0; i < diff_feat.numel(); ++i) feat3[i] = diff_feat[i];
  Tensor feat_up3 = core::resize_bilinear(feat3, h, w);

  Tensor out({h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.at(y, x) = alpha * diff_pixel.at(y, x) + (1.0 - alpha) * feat_up3.at(0, y, x);
  return out;
}

GroundTruthPdm fuse(const Tensor& diff_pixel, const Tensor& diff_feat, double alpha) {
  GroundTruthPdm pdm;
  pdm.alpha = alpha;
  pdm.grid = fuse_raw(diff_pixel, diff_feat, alpha);
  pdm.pixel_stats = stats_of(diff_pixel);
  pdm.feat_stats = stats_of(diff_feat);

  constexpr double kEps = 1e-12;
  const double lo = core::min_value(pdm.grid);
  const double hi = core::max_value(pdm.grid);
  if (hi - lo < kEps) {
    for (std::int64_t i = 0; i < pdm.grid.numel(); ++i) pdm.grid[i] = 0.0;
  } else {
    const double inv = 1.0 / (hi - lo);
    for (std::int64_t i = 0; i < pdm.grid.numel(); ++i) pdm.grid[i] = (pdm.grid[i] - lo) * inv;
  }
  return pdm;
}

GroundTruthPdm build_gt_pdm(const Image& syn, const Image& gt, const FeatureExtractor& extractor,
                            double alpha) {
  const Tensor dp = pixel_diff(syn, gt);
  const Tensor df = feat_diff(extractor.extract(syn), extractor.extract(gt));
  return fuse(dp, df, alpha);
}

}  // namespace percep::gtpdm
