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

#ifndef ASC_DSP_PATCHES_HPP_
#define ASC_DSP_PATCHES_HPP_

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "asc/dsp/spectrogram.hpp"

namespace asc::dsp {

inline constexpr std::size_t kPatchSize = 128;

struct PatchKey {
  std::string segment_id;
  std::size_t patch_index = 0;

  auto operator<=>(const PatchKey&) const = default;
  std::string to_string() const;
};

// A kPatchSize x kPatchSize tile, frames-major (values[t * 128 + f]).
struct Patch {
  PatchKey key;
  SpectrogramKind kind = SpectrogramKind::kLogMel;
  std::vector<float> values;
  std::vector<float> label;  // one-hot over the class count, or empty
};

struct PatchSet {
  SpectrogramKind kind = SpectrogramKind::kLogMel;
  std::size_t n_classes = 0;
  std::vector<Patch> patches;
  // Set when some input had fewer than kPatchSize frames.
  bool short_input = false;

  void append(PatchSet&& other);
};

// floor(T / 128) consecutive, non-overlapping patches; patch i covers frames
// [128 i, 128 (i + 1)). With n_classes > 0 and a labelled spectrogram, each
// patch carries a one-hot label.
PatchSet split_patches(const Spectrogram& spec, std::size_t n_classes = 0);

// Z-score statistics over a training set, one pair per spectrogram kind.
struct NormalizationStats {
  double mean = 0.0;
  double stddev = 1.0;
};

NormalizationStats fit_normalization(const std::vector<Spectrogram>& specs);
void apply_normalization(const NormalizationStats& stats, Spectrogram& spec);

}  // namespace asc::dsp

#endif  // ASC_DSP_PATCHES_HPP_
