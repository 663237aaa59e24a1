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

// All OpenCV usage lives in this translation unit.

#include "percep/core/io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-enum-enum-conversion"
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#pragma GCC diagnostic pop

namespace percep::core {

namespace {

[[noreturn]] void fail(const std::filesystem::path& p, const std::string& what) {
  throw std::runtime_error(what + ": " + p.string());
}

cv::Mat load_mat(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty()) fail(path, "cannot read image");
  return m;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  cv::Mat m = load_mat(path);
  const int ch = m.channels();
  if (ch != 1 && ch != 3 && ch != 4) fail(path, "unsupported channel count");
  // Divide (not multiply by a reciprocal) so values land exactly on the
  // same k/max grid the quantizer produces.
  double denom;
  switch (m.depth()) {
    case CV_8U: denom = 255.0; break;
    case CV_16U: denom = 65535.0; break;
    default: fail(path, "unsupported bit depth");
  }
  const int out_c = (ch == 1) ? 1 : 3;
  Image img = Image::zeros(out_c, m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) {
      double b, g, r;
      if (m.depth() == CV_8U) {
        if (ch == 1) {
          img.at(0, y, x) = m.at<std::uint8_t>(y, x) / denom;
          continue;
        }
        const auto* px = m.ptr<std::uint8_t>(y) + static_cast<size_t>(x) * ch;
        b = px[0] / denom;
        g = px[1] / denom;
        r = px[2] / denom;
      } else {
        if (ch == 1) {
          img.at(0, y, x) = m.at<std::uint16_t>(y, x) / denom;
          continue;
        }
        const auto* px = m.ptr<std::uint16_t>(y) + static_cast<size_t>(x) * ch;
        b = px[0] / denom;
        g = px[1] / denom;
        r = px[2] / denom;
      }
      img.at(0, y, x) = r;
      img.at(1, y, x) = g;
      img.at(2, y, x) = b;
    }
  return img;
}

namespace {

std::uint16_t to_u16(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_png(const std::filesystem::path& path, const cv::Mat& m) {
  std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), m)) fail(path, "cannot write image");
}

}  // namespace

void write_image_png16(const std::filesystem::path& path, const Image& img) {
  const int c = img.channels(), h = img.height(), w = img.width();
  if (c == 1) {
    cv::Mat m(h, w, CV_16UC1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) m.at<std::uint16_t>(y, x) = to_u16(img.at(0, y, x));
    write_png(path, m);
    return;
  }
  cv::Mat m(h, w, CV_16UC3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto* px = m.ptr<std::uint16_t>(y) + static_cast<size_t>(x) * 3;
      px[0] = to_u16(img.at(2, y, x));  // BGR on disk
      px[1] = to_u16(img.at(1, y, x));
      px[2] = to_u16(img.at(0, y, x));
    }
  write_png(path, m);
}

void write_image_png8(const std::filesystem::path& path, const Image& img) {
  const int c = img.channels(), h = img.height(), w = img.width();
  cv::Mat m(h, w, c == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (c == 1) {
        m.at<std::uint8_t>(y, x) = to_u8(img.at(0, y, x));
      } else {
        auto* px = m.ptr<std::uint8_t>(y) + static_cast<size_t>(x) * 3;
        px[0] = to_u8(img.at(2, y, x));
        px[1] = to_u8(img.at(1, y, x));
        px[2] = to_u8(img.at(0, y, x));
      }
    }
  write_png(path, m);
}

void write_map_png16(const std::filesystem::path& path, const Tensor& hw) {
  if (hw.rank() != 2) throw std::invalid_argument("write_map_png16: expected HW tensor");
  cv::Mat m(hw.dim(0), hw.dim(1), CV_16UC1);
  for (int y = 0; y < hw.dim(0); ++y)
    for (int x = 0; x < hw.dim(1); ++x) m.at<std::uint16_t>(y, x) = to_u16(hw.at(y, x));
  write_png(path, m);
}

Tensor read_map_png16(const std::filesystem::path& path) {
  cv::Mat m = load_mat(path);
  if (m.channels() != 1 || m.depth() != CV_16U) fail(path, "expected 16-bit single-channel map");
  Tensor t({m.rows, m.cols});
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) t.at(y, x) = m.at<std::uint16_t>(y, x) / 65535.0;
  return t;
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  cv::Mat m(mask.h, mask.w, CV_8UC1);
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x) m.at<std::uint8_t>(y, x) = mask.at(y, x) ? 255 : 0;
  write_png(path, m);
}

Mask read_mask_png(const std::filesystem::path& path) {
  cv::Mat m = load_mat(path);
  if (m.channels() != 1) fail(path, "expected single-channel mask");
  Mask mask(m.rows, m.cols, MaskKind::rect);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) {
      const double v = m.depth() == CV_16U ? m.at<std::uint16_t>(y, x) / 65535.0
                                           : m.at<std::uint8_t>(y, x) / 255.0;
      mask.at(y, x) = v >= 0.5 ? 1 : 0;
    }
  return mask;
}

Image jpeg_roundtrip(const Image& img, int quality) {
  if (img.channels() != 3) throw std::invalid_argument("jpeg_roundtrip: expected 3-channel image");
  if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg_roundtrip: quality out of range");
  const int h = img.height(), w = img.width();
  cv::Mat m(h, w, CV_8UC3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto* px = m.ptr<std::uint8_t>(y) + static_cast<size_t>(x) * 3;
      px[0] = to_u8(img.at(2, y, x));
      px[1] = to_u8(img.at(1, y, x));
      px[2] = to_u8(img.at(0, y, x));
    }
  std::vector<uchar> buf;
  const std::vector<int> params{cv::IMWRITE_JPEG_QUALITY, quality};
  if (!cv::imencode(".jpg", m, buf, params)) throw std::runtime_error("jpeg encode failed");
  cv::Mat back = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (back.empty() || back.rows != h || back.cols != w) throw std::runtime_error("jpeg decode failed");
  Image out = Image::zeros(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto* px = back.ptr<std::uint8_t>(y) + static_cast<size_t>(x) * 3;
      out.at(0, y, x) = px[2] / 255.0;
      out.at(1, y, x) = px[1] / 255.0;
      out.at(2, y, x) = px[0] / 255.0;
    }
  return out;
}

}  // namespace percep::core
