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

// ASCP patch stores: one spectrogram kind's patches, cached between the
// extract and train steps.
//
//   "ASCP" u16 version u8 kind u8 short_input u32 patch_size u32 n_classes
//   u64 count, then per patch: char[64] segment_id, u32 patch_index,
//   u8 has_label, u8[3] reserved, f32[patch_size^2], f32[n_classes]

#ifndef ASC_IO_PATCH_STORE_HPP_
#define ASC_IO_PATCH_STORE_HPP_

#include <cstdint>
#include <filesystem>

#include "asc/dsp/patches.hpp"

namespace asc::io {

inline constexpr std::uint16_t kPatchStoreVersion = 1;

void save_patches(const std::filesystem::path& path, const dsp::PatchSet& set,
                  std::size_t patch_size = dsp::kPatchSize);
dsp::PatchSet load_patches(const std::filesystem::path& path,
                           std::size_t patch_size = dsp::kPatchSize);

}  // namespace asc::io

#endif  // ASC_IO_PATCH_STORE_HPP_
