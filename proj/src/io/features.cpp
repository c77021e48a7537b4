// Copyright 2026 The ASC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "asc/io/features.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include "binary.hpp"

namespace asc::io {

using detail::get;
using detail::put;

void save_features(const std::filesystem::path& path, const FeatureFile& file) {
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    const auto& r = file.records[i];
    if (r.values.size() != file.dim) {
      throw std::invalid_argument("save_features: record " + std::to_string(i) +
                                  " has " + std::to_string(r.values.size()) +
                                  " values, expected " +
                                  std::to_string(file.dim));
    }
    if (!r.label.empty() && r.label.size() != file.n_classes) {
      throw std::invalid_argument("save_features: record " + std::to_string(i) +
                                  " label size mismatch");
    }
    if (r.key.patch_index > UINT32_MAX) {
      throw std::invalid_argument("save_features: patch index overflow");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write("ASCF", 4);
  put<std::uint16_t>(out, kFeatureFileVersion);
  put<std::uint16_t>(out, 0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.n_classes));
  put<std::uint64_t>(out, file.records.size());
  const std::vector<float> no_label(file.n_classes, 0.0f);
  for (const auto& r : file.records) {
    detail::put_id(out, r.key.segment_id, kSegmentIdBytes);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(r.key.patch_index));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(r.source));
    put<std::uint8_t>(out, r.label.empty() ? 0 : 1);
    put<std::uint16_t>(out, 0);
    detail::put_array<float>(out, r.values);
    detail::put_array<float>(out, r.label.empty() ? no_label : r.label);
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

FeatureFile load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  detail::expect_magic(in, "ASCF", path.string());
  const auto version = get<std::uint16_t>(in, "version");
  if (version != kFeatureFileVersion) {
    throw std::runtime_error(path.string() + ": unsupported feature file version " +
                             std::to_string(version));
  }
  get<std::uint16_t>(in, "flags");
  FeatureFile file;
  file.dim = get<std::uint32_t>(in, "dim");
  file.n_classes = get<std::uint32_t>(in, "class count");
  const auto count = get<std::uint64_t>(in, "record count");

  // Reject counts the file cannot hold before reserving memory.
  const std::uint64_t record_bytes =
      kSegmentIdBytes + 8 + 4 * (file.dim + file.n_classes);
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  if (count > remaining / record_bytes) {
    throw std::runtime_error(path.string() + ": truncated feature file (" +
                             std::to_string(count) + " records declared)");
  }

  file.records.resize(count);
  for (auto& r : file.records) {
    r.key.segment_id = detail::get_id(in, kSegmentIdBytes);
    r.key.patch_index = get<std::uint32_t>(in, "patch index");
    const auto source = get<std::uint8_t>(in, "source");
    if (source > static_cast<std::uint8_t>(encoder::FeatureSource::kCombined)) {
      throw std::runtime_error(path.string() + ": bad feature source " +
                               std::to_string(source));
    }
    r.source = static_cast<encoder::FeatureSource>(source);
    const bool has_label = get<std::uint8_t>(in, "label flag") != 0;
    get<std::uint16_t>(in, "reserved");
    r.values.resize(file.dim);
    detail::get_array<float>(in, r.values, "feature values");
    r.label.resize(file.n_classes);
    detail::get_array<float>(in, r.label, "label");
    if (!has_label) r.label.clear();
  }
  return file;
}

}  // namespace asc::io
