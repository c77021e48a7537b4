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

#include "asc/dsp/patches.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace asc::dsp {

std::string PatchKey::to_string() const {
  return segment_id + "#" + std::to_string(patch_index);
}

void PatchSet::append(PatchSet&& other) {
  if (!patches.empty() && !other.patches.empty() && other.kind != kind) {
    throw std::invalid_argument("PatchSet::append: kind mismatch");
  }
  if (patches.empty()) kind = other.kind;
  n_classes = std::max(n_classes, other.n_classes);
  short_input = short_input || other.short_input;
  for (Patch& p : other.patches) patches.push_back(std::move(p));
}

PatchSet split_patches(const Spectrogram& spec, std::size_t n_classes) {
  if (spec.bins() != kPatchSize) {
    throw std::invalid_argument("split_patches: spectrogram has " +
                                std::to_string(spec.bins()) + " bins, need " +
                                std::to_string(kPatchSize));
  }
  PatchSet set;
  set.kind = spec.kind;
  set.n_classes = n_classes;
  const std::size_t count = spec.frames() / kPatchSize;
  set.short_input = count == 0;
  if (n_classes > 0 && spec.label &&
      (*spec.label < 0 || static_cast<std::size_t>(*spec.label) >= n_classes)) {
    throw std::invalid_argument("split_patches: label " +
                                std::to_string(*spec.label) +
                                " outside class count " +
                                std::to_string(n_classes));
  }
  for (std::size_t i = 0; i < count; ++i) {
    Patch p;
    p.key = {spec.segment_id, i};
    p.kind = spec.kind;
    const float* first = spec.values.row(i * kPatchSize);
    p.values.assign(first, first + kPatchSize * kPatchSize);
    if (n_classes > 0 && spec.label) {
      p.label.assign(n_classes, 0.0f);
      p.label[static_cast<std::size_t>(*spec.label)] = 1.0f;
    }
    set.patches.push_back(std::move(p));
  }
  return set;
}

NormalizationStats fit_normalization(const std::vector<Spectrogram>& specs) {
  double sum = 0.0;
  double sum_sq = 0.0;
  double count = 0.0;
  for (const Spectrogram& s : specs) {
    for (float v : s.values.data) {
      sum += v;
      sum_sq += static_cast<double>(v) * v;
    }
    count += static_cast<double>(s.values.data.size());
  }
  if (count == 0.0) {
    throw std::invalid_argument("fit_normalization: no spectrogram values");
  }
  NormalizationStats stats;
  stats.mean = sum / count;
  const double var = std::max(0.0, sum_sq / count - stats.mean * stats.mean);
  stats.stddev = var > 0.0 ? std::sqrt(var) : 1.0;
  return stats;
}

void apply_normalization(const NormalizationStats& stats, Spectrogram& spec) {
  const double inv = 1.0 / stats.stddev;
  for (float& v : spec.values.data) {
    v = static_cast<float>((v - stats.mean) * inv);
  }
}

}  // namespace asc::dsp
