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

// ASCF feature files: high-level feature vectors with provenance and soft
// labels. Little-endian throughout.
//
//   "ASCF" u16 version u16 flags u32 dim u32 n_classes u64 count
//   per record: char[64] segment_id, u32 patch_index, u8 source,
//               u8 has_label, u16 reserved, f32[dim], f32[n_classes]
//
// Records without a label store zeros in the label slot.

#ifndef ASC_IO_FEATURES_HPP_
#define ASC_IO_FEATURES_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "asc/encoder/training.hpp"

namespace asc::io {

inline constexpr std::uint16_t kFeatureFileVersion = 1;
inline constexpr std::size_t kSegmentIdBytes = 64;

struct FeatureFile {
  std::size_t dim = encoder::kFeatureDim;
  std::size_t n_classes = 0;
  std::vector<encoder::HighLevelFeature> records;
};

// Every record must have `dim` values, a label of n_classes or none, and an
// id shorter than kSegmentIdBytes.
void save_features(const std::filesystem::path& path, const FeatureFile& file);
FeatureFile load_features(const std::filesystem::path& path);

}  // namespace asc::io

#endif  // ASC_IO_FEATURES_HPP_
