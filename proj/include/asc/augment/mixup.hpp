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

// Mixup: convex combinations of sample pairs and their labels,
//
//   x~ = lambda * x_i + (1 - lambda) * x_j,  y~ = lambda * y_i + (1 - lambda) * y_j.
//
// Patch stage: originals + one Beta(a, a) copy + one clipped N(m, s) copy.
// Feature stage: originals + one Beta(a, a) copy. Partners come from a
// seeded random cyclic permutation, so nothing is paired with itself.

#ifndef ASC_AUGMENT_MIXUP_HPP_
#define ASC_AUGMENT_MIXUP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace asc::augment {

enum class MixupStage { kPatch, kFeature };

struct MixupConfig {
  double beta_alpha = 0.4;
  double gaussian_mean = 0.5;
  double gaussian_std = 0.15;
  std::uint64_t rng_seed = 0;
  MixupStage stage = MixupStage::kPatch;

  void validate() const;
};

// Writes the mixed sample and label into out_x / out_y. Throws
// std::invalid_argument on shape mismatch or lambda outside [0, 1].
void mixup_pair(std::span<const float> x_i, std::span<const float> x_j,
                std::span<const float> y_i, std::span<const float> y_j,
                double lambda, std::span<float> out_x, std::span<float> out_y);

enum class MixSource { kOriginal, kBeta, kGaussian };

// Output item = mix(first, second, lambda). Originals have first == second
// and lambda == 1.
struct MixEntry {
  std::size_t first = 0;
  std::size_t second = 0;
  float lambda = 1.0f;
  MixSource source = MixSource::kOriginal;
};

struct MixupPlan {
  std::vector<MixEntry> entries;
  // Fewer than two items: originals only.
  bool degenerate = false;
};

// Index-level plans, so aligned inputs (e.g. three spectrogram kinds of one
// patch) can share partners and lambdas. Sizes are 3n (patch) and 2n
// (feature) unless degenerate.
MixupPlan plan_patch_mixup(std::size_t n, const MixupConfig& cfg);
MixupPlan plan_feature_mixup(std::size_t n, const MixupConfig& cfg);
MixupPlan plan_mixup(std::size_t n, const MixupConfig& cfg);  // by cfg.stage

// Row-major items with soft labels.
struct LabeledSet {
  std::size_t item_size = 0;
  std::size_t n_classes = 0;
  std::vector<float> x;  // n x item_size
  std::vector<float> y;  // n x n_classes
  bool degenerate = false;

  std::size_t size() const { return item_size ? x.size() / item_size : 0; }
};

// Materializes a plan over a set.
LabeledSet apply_plan(const LabeledSet& in, const MixupPlan& plan);

LabeledSet augment_patch_set(const LabeledSet& patches, const MixupConfig& cfg);
LabeledSet augment_feature_set(const LabeledSet& features,
                               const MixupConfig& cfg);

}  // namespace asc::augment

#endif  // ASC_AUGMENT_MIXUP_HPP_
