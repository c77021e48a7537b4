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

// Synthetic acoustic scenes for desk-scale runs. Each class is one of five
// parameterized archetypes; classes beyond five reuse an archetype with
// shifted frequencies and rates.

#ifndef ASC_IO_SYNTHETIC_HPP_
#define ASC_IO_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asc/dsp/audio.hpp"
#include "asc/io/manifest.hpp"

namespace asc::io {

enum class Archetype { kToneChord, kRisingChirps, kBandNoise, kAmNoise, kClickTrain };

struct SyntheticConfig {
  std::size_t n_classes = 4;
  std::size_t n_segments = 200;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  double duration_seconds = 10.0;
  double test_fraction = 0.2;    // per class, stratified
  double other_device_fraction = 0.2;  // share recorded on devices B and C

  void validate() const;
};

Archetype archetype_of(std::size_t class_index);
std::string class_name(std::size_t class_index);

// Segment i has class i % n_classes. Deterministic in (cfg.seed, i).
dsp::AudioSegment synthesize_segment(const SyntheticConfig& cfg,
                                     std::size_t segment_index);

struct SyntheticDataset {
  std::filesystem::path manifest_path;
  Manifest manifest;
};

// Writes PCM16 files under out_dir/audio and out_dir/manifest.csv.
SyntheticDataset generate_synthetic_dataset(const SyntheticConfig& cfg,
                                            const std::filesystem::path& out_dir);

}  // namespace asc::io

#endif  // ASC_IO_SYNTHETIC_HPP_
