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

#include "percep/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "percep/core/hash.hpp"

namespace percep::nn {

namespace {
constexpr char kMagic[8] = {'P', 'E', 'R', 'C', 'E', 'P', 'T', '1'};
}

void Checkpoint::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json header;
  header["format_version"] = kFormatVersion;
  header["meta"] = meta;
  auto& list = header["tensors"] = nlohmann::ordered_json::array();
  for (const auto& [name, t] : tensors) {
    nlohmann::ordered_json e;
    e["name"] = name;
    e["shape"] = t.shape();
    list.push_back(std::move(e));
  }
  const std::string hs = header.dump();
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint save: cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t n = static_cast<std::uint32_t>(hs.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& [name, t] : tensors)
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * static_cast<std::int64_t>(sizeof(double))));
  if (!out) throw std::runtime_error("checkpoint save: write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint load: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint load: bad magic in " + path.string());
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::string hs(n, '\0');
  in.read(hs.data(), n);
  if (!in) throw std::runtime_error("checkpoint load: truncated header in " + path.string());
  const auto header = nlohmann::ordered_json::parse(hs);
  if (header.at("format_version").get<int>() != kFormatVersion)
    throw std::runtime_error("checkpoint load: unsupported format version in " + path.string());
  Checkpoint ck;
  ck.meta = header.value("meta", nlohmann::ordered_json::object());
  for (const auto& e : header.at("tensors")) {
    Tensor t(e.at("shape").get<std::vector<int>>());
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * static_cast<std::int64_t>(sizeof(double))));
    if (!in) throw std::runtime_error("checkpoint load: truncated payload in " + path.string());
    ck.tensors.emplace_back(e.at("name").get<std::string>(), std::move(t));
  }
  return ck;
}

Checkpoint Checkpoint::from_params(const ParamMap& params, nlohmann::ordered_json meta) {
  Checkpoint ck;
  ck.meta = std::move(meta);
  for (const auto& [name, v] : params) ck.tensors.emplace_back(name, v->val);
  return ck;
}

void Checkpoint::restore_into(ParamMap& params) const {
  if (tensors.size() != params.size())
    throw std::runtime_error("checkpoint restore: parameter count mismatch");
  for (const auto& [name, t] : tensors) {
    Var v = params.at(name);
    if (!v->val.same_shape(t))
      throw std::runtime_error("checkpoint restore: shape mismatch for " + name);
    v->val = t;
  }
}

}  // namespace percep::nn

namespace percep::nn {

std::uint64_t ParamMap::checksum() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const auto& [name, v] : items_) {
    h = core::fnv1a64_bytes(name.data(), name.size(), h);
    h = core::fnv1a64_bytes(v->val.data(),
                            static_cast<size_t>(v->val.numel()) * sizeof(double), h);
  }
  return h;
}

}  // namespace percep::nn
