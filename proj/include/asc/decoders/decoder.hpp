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

// Back-end classifiers over high-level feature vectors. All three kinds
// share one fit/predict interface so any feature source can feed any
// decoder.

#ifndef ASC_DECODERS_DECODER_HPP_
#define ASC_DECODERS_DECODER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asc/augment/mixup.hpp"
#include "asc/decoders/forest.hpp"
#include "asc/decoders/moe.hpp"
#include "asc/nn/loss.hpp"
#include "asc/nn/sequential.hpp"

namespace asc::decoders {

enum class DecoderKind { kRfr, kDnn, kMoe };

inline constexpr std::array<DecoderKind, 3> kAllDecoders = {
    DecoderKind::kRfr, DecoderKind::kDnn, DecoderKind::kMoe};

std::string_view to_string(DecoderKind kind);
DecoderKind decoder_kind_from_string(std::string_view name);

struct DecoderOptions {
  std::size_t input_dim = 256;
  std::size_t n_classes = 0;
  std::size_t n_experts = 10;     // MoE
  double dropout = 0.3;           // DNN-03 and MoE trunk
  std::uint64_t seed = 0;         // weight initialization
  ForestConfig forest;            // RFR

  void validate() const;
};

struct DecoderTrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 50;
  double learning_rate = 1e-4;
  nn::LossConfig reg;
  augment::MixupConfig mixup;  // stage forced to Feature; seed per epoch
  bool use_mixup = true;
  std::uint64_t seed = 0;
  std::function<void(std::size_t epoch, double loss)> on_epoch;

  void validate() const;
};

class Decoder {
 public:
  virtual ~Decoder() = default;

  virtual DecoderKind kind() const = 0;
  const DecoderOptions& options() const { return opts_; }
  std::size_t input_dim() const { return opts_.input_dim; }
  std::size_t n_classes() const { return opts_.n_classes; }

  // `data` holds rows of input_dim features and soft labels. Returns the
  // per-epoch training loss (empty for the forest).
  virtual std::vector<double> fit(const augment::LabeledSet& data,
                                  const DecoderTrainConfig& cfg) = 0;

  // Rows of input_dim features in, rows of n_classes scores out. Neural
  // decoders return softmax probabilities; the forest returns mean leaf
  // label vectors.
  virtual std::vector<float> predict(std::span<const float> x) const = 0;

  // Notes on structure choices that a checkpoint should carry.
  virtual std::vector<std::string> deviation_flags() const { return {}; }

 protected:
  explicit Decoder(const DecoderOptions& opts);
  void check_rows(std::span<const float> x) const;

  DecoderOptions opts_;
};

class RfrDecoder final : public Decoder {
 public:
  explicit RfrDecoder(const DecoderOptions& opts);

  DecoderKind kind() const override { return DecoderKind::kRfr; }
  std::vector<double> fit(const augment::LabeledSet& data,
                          const DecoderTrainConfig& cfg) override;
  std::vector<float> predict(std::span<const float> x) const override;

  RandomForest& forest() { return forest_; }
  const RandomForest& forest() const { return forest_; }

 private:
  RandomForest forest_;
};

// DNN-03 (Dense 512-1024-1024-C) or the MoE decoder (same trunk, a
// 1024 -> 256 projection, then the expert layer). Both end in logits.
class NeuralDecoder final : public Decoder {
 public:
  NeuralDecoder(DecoderKind kind, const DecoderOptions& opts);

  DecoderKind kind() const override { return kind_; }
  std::vector<double> fit(const augment::LabeledSet& data,
                          const DecoderTrainConfig& cfg) override;
  std::vector<float> predict(std::span<const float> x) const override;
  std::vector<std::string> deviation_flags() const override;

  nn::Sequential<float>& network() { return net_; }
  const nn::Sequential<float>& network() const { return net_; }
  // The expert layer (MoE only).
  const MoELayer<float>* moe() const;
  // Hidden representation that feeds the expert layer (MoE only).
  nn::Tensor<float> moe_input(std::span<const float> x) const;

 private:
  DecoderKind kind_;
  nn::Sequential<float> net_;
};

std::unique_ptr<Decoder> make_decoder(DecoderKind kind,
                                      const DecoderOptions& opts);

// Row-wise argmax, lowest index on ties.
std::vector<std::size_t> argmax_rows(std::span<const float> scores,
                                     std::size_t n_classes);

}  // namespace asc::decoders

#endif  // ASC_DECODERS_DECODER_HPP_
