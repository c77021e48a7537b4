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

#ifndef ASC_ENCODER_TRAINING_HPP_
#define ASC_ENCODER_TRAINING_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "asc/augment/mixup.hpp"
#include "asc/dsp/patches.hpp"
#include "asc/encoder/encoder.hpp"

namespace asc::encoder {

// Patch sets of the three kinds reordered so that sets[k].patches[i] share
// one key for every i. Labels are taken from the LM set.
struct PatchTriples {
  std::size_t n_classes = 0;
  std::array<dsp::PatchSet, 3> sets;

  std::size_t size() const { return sets[0].patches.size(); }
  const dsp::PatchKey& key(std::size_t i) const {
    return sets[0].patches[i].key;
  }
  const std::vector<float>& label(std::size_t i) const {
    return sets[0].patches[i].label;
  }
};

// Sets must be LM, GA, CQ in that order. Throws std::invalid_argument naming
// keys present in some kinds but not all (up to 10 listed), duplicates, or
// label disagreement.
PatchTriples align_patch_sets(std::array<dsp::PatchSet, 3> sets);

struct EpochLog {
  std::size_t epoch = 0;       // 1-based
  EncoderLossReport loss;      // item-weighted mean over the epoch's batches
  std::size_t items = 0;       // training items after mixup
  double seconds = 0.0;
};

struct EncoderTrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 50;
  double learning_rate = 1e-4;
  EncoderLossConfig loss;
  nn::LossConfig reg;
  augment::MixupConfig mixup;  // rng_seed is replaced per epoch
  bool use_mixup = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::function<void(const EpochLog&)> on_epoch;

  void validate() const;
};

// Adam on mixed batches (one plan per epoch shared by the three kinds).
// Returns the per-epoch log; the model keeps the final-epoch weights.
std::vector<EpochLog> train_encoder(Encoder<float>& model,
                                    const PatchTriples& data,
                                    const EncoderTrainConfig& cfg);

// Fills x (three [B, 1, side, side] tensors) and y ([B, C]) from mix
// entries.
void build_batch(const PatchTriples& data,
                 std::span<const augment::MixEntry> entries, std::size_t side,
                 std::array<nn::Tensor<float>, 3>& x, nn::Tensor<float>& y);

// Eval-mode outputs for every triple, in triple order.
struct EncodedPatches {
  std::size_t n_classes = 0;
  std::vector<dsp::PatchKey> keys;
  std::vector<std::vector<float>> labels;
  std::array<std::vector<float>, 4> features;  // n x 256 per source
  std::array<std::vector<float>, 4> probs;     // n x C softmax per head

  std::size_t size() const { return keys.size(); }
};

EncodedPatches encode_patches(const Encoder<float>& model,
                              const PatchTriples& data,
                              std::size_t batch_size = 50);

struct HighLevelFeature {
  dsp::PatchKey key;
  FeatureSource source = FeatureSource::kCombined;
  std::vector<float> values;  // kFeatureDim
  std::vector<float> label;   // n_classes, may be empty
};

// Four records per triple, grouped by triple: LM, GA, CQ, combined.
std::vector<HighLevelFeature> extract_features(const Encoder<float>& model,
                                               const PatchTriples& data,
                                               std::size_t batch_size = 50);
std::vector<HighLevelFeature> to_records(const EncodedPatches& encoded);

}  // namespace asc::encoder

#endif  // ASC_ENCODER_TRAINING_HPP_
