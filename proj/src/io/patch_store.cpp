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

#include "asc/io/patch_store.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include "asc/io/features.hpp"
#include "binary.hpp"

namespace asc::io {

using detail::get;
using detail::put;

void save_patches(const std::filesystem::path& path, const dsp::PatchSet& set,
                  std::size_t patch_size) {
  const std::size_t area = patch_size * patch_size;
  for (const auto& p : set.patches) {
    if (p.values.size() != area ||
        (!p.label.empty() && p.label.size() != set.n_classes) ||
        p.kind != set.kind) {
      throw std::invalid_argument("save_patches: patch " + p.key.to_string() +
                                  " does not match the set");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write("ASCP", 4);
  put<std::uint16_t>(out, kPatchStoreVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(set.kind));
  put<std::uint8_t>(out, set.short_input ? 1 : 0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(patch_size));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(set.n_classes));
  put<std::uint64_t>(out, set.patches.size());
  const std::vector<float> no_label(set.n_classes, 0.0f);
  for (const auto& p : set.patches) {
    detail::put_id(out, p.key.segment_id, kSegmentIdBytes);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.key.patch_index));
    put<std::uint8_t>(out, p.label.empty() ? 0 : 1);
    put<std::uint8_t>(out, 0);
    put<std::uint16_t>(out, 0);
    detail::put_array<float>(out, p.values);
    detail::put_array<float>(out, p.label.empty() ? no_label : p.label);
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

dsp::PatchSet load_patches(const std::filesystem::path& path,
                           std::size_t patch_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  detail::expect_magic(in, "ASCP", path.string());
  const auto version = get<std::uint16_t>(in, "version");
  if (version != kPatchStoreVersion) {
    throw std::runtime_error(path.string() + ": unsupported patch store version " +
                             std::to_string(version));
  }
  dsp::PatchSet set;
  const auto kind = get<std::uint8_t>(in, "kind");
  if (kind > static_cast<std::uint8_t>(dsp::SpectrogramKind::kCqt)) {
    throw std::runtime_error(path.string() + ": bad spectrogram kind");
  }
  set.kind = static_cast<dsp::SpectrogramKind>(kind);
  set.short_input = get<std::uint8_t>(in, "flags") != 0;
  const auto stored_size = get<std::uint32_t>(in, "patch size");
  if (stored_size != patch_size) {
    throw std::runtime_error(path.string() + ": patch size " +
                             std::to_string(stored_size) + ", expected " +
                             std::to_string(patch_size));
  }
  set.n_classes = get<std::uint32_t>(in, "class count");
  const auto count = get<std::uint64_t>(in, "patch count");
  const std::uint64_t record_bytes =
      kSegmentIdBytes + 8 + 4 * (patch_size * patch_size + set.n_classes);
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  if (count > remaining / record_bytes) {
    throw std::runtime_error(path.string() + ": truncated patch store");
  }
  set.patches.resize(count);
  for (auto& p : set.patches) {
    p.kind = set.kind;
    p.key.segment_id = detail::get_id(in, kSegmentIdBytes);
    p.key.patch_index = get<std::uint32_t>(in, "patch index");
    const bool has_label = get<std::uint8_t>(in, "label flag") != 0;
    get<std::uint8_t>(in, "reserved");
    get<std::uint16_t>(in, "reserved");
    p.values.resize(patch_size * patch_size);
    detail::get_array<float>(in, p.values, "patch values");
    p.label.resize(set.n_classes);
    detail::get_array<float>(in, p.label, "label");
    if (!has_label) p.label.clear();
  }
  return set;
}

}  // namespace asc::io
