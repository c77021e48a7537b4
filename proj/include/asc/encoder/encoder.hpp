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

// Three-branch encoder: per-kind CNN + DNN-01 heads, a combiner and DNN-02
// over the combined feature. Branch order everywhere is LM, GA, CQ, and
// index 3 denotes the combined path.

#ifndef ASC_ENCODER_ENCODER_HPP_
#define ASC_ENCODER_ENCODER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "asc/encoder/architecture.hpp"
#include "asc/encoder/combiner.hpp"
#include "asc/nn/layers.hpp"
#include "asc/nn/loss.hpp"
#include "asc/nn/sequential.hpp"

namespace asc::encoder {

inline constexpr std::size_t kBranches = 3;
inline constexpr std::size_t kCombinedIndex = 3;

enum class FeatureSource { kLogMel, kGamma, kCqt, kCombined };

inline constexpr std::array<FeatureSource, 4> kAllSources = {
    FeatureSource::kLogMel, FeatureSource::kGamma, FeatureSource::kCqt,
    FeatureSource::kCombined};

std::string_view to_string(FeatureSource source);
FeatureSource feature_source_from_string(std::string_view name);
// Lower-case short tag used in parameter names: lm, ga, cq, com.
std::string_view source_tag(FeatureSource source);

struct EncoderConfig {
  std::size_t n_classes = 0;
  CombinerKind combiner = CombinerKind::kLin;
  WidthProfile profile = WidthProfile::kFull;
  std::uint64_t seed = 0;
  // Patch side; the CNN needs at least 16 so the three poolings leave a
  // non-empty map.
  std::size_t patch_size = 128;

  void validate() const;
};

template <typename T>
struct EncoderOutput {
  std::array<nn::Tensor<T>, 4> logits;    // [N, C] each
  std::array<nn::Tensor<T>, 4> features;  // [N, 256] each
};

template <typename T>
class Encoder {
 public:
  explicit Encoder(const EncoderConfig& cfg);

  Encoder(Encoder&&) noexcept = default;
  Encoder& operator=(Encoder&&) noexcept = default;

  const EncoderConfig& config() const { return cfg_; }

  // Inputs are [N, 1, P, P] per branch, all with the same N.
  EncoderOutput<T> forward(const std::array<nn::Tensor<T>, 3>& x,
                           nn::Mode mode);
  EncoderOutput<T> infer(const std::array<nn::Tensor<T>, 3>& x) const;
  // Gradients with respect to the four logit sets of the last forward().
  void backward(const std::array<nn::Tensor<T>, 4>& grad_logits);

  // Names: cnn_<tag>.*, head_<tag>.*, combiner.*, dnn2.*
  std::vector<nn::Parameter<T>*> parameters();
  std::vector<nn::NamedBuffer<T>> buffers();
  std::size_t parameter_count();
  void zero_grad();

  // Branch work runs on up to this many threads (1 = serial). Results do
  // not depend on the setting.
  void set_threads(std::size_t threads) { threads_ = threads ? threads : 1; }

  nn::Sequential<T>& cnn(std::size_t b) { return cnn_.at(b); }
  nn::Sequential<T>& head(std::size_t b) { return head_.at(b); }
  Combiner<T>& combiner() { return combiner_; }
  const Combiner<T>& combiner() const { return combiner_; }
  nn::Sequential<T>& dnn2() { return dnn2_; }

 private:
  void check_inputs(const std::array<nn::Tensor<T>, 3>& x) const;
  template <typename Fn>
  void for_branches(Fn&& fn);

  EncoderConfig cfg_;
  std::array<nn::Sequential<T>, 3> cnn_;
  std::array<nn::Sequential<T>, 3> head_;
  Combiner<T> combiner_;
  nn::Sequential<T> dnn2_;
  std::size_t threads_ = 1;
};

struct EncoderLossConfig {
  double alpha = 1.0 / 3.0;
  double beta = 1.0;

  void validate() const;
};

// alpha * (l_lm + l_ga + l_cq) + beta * l_com
double combine_losses(const std::array<double, 3>& branch, double combined,
                      const EncoderLossConfig& cfg);

struct EncoderLossReport {
  std::array<double, 4> terms{};  // cross-entropy of LM, GA, CQ, combined
  double l2 = 0.0;                // (lambda / 2) ||theta||^2, counted once
  double total = 0.0;             // combine_losses(terms) + l2
};

template <typename T>
struct EncoderLossResult {
  EncoderLossReport report;
  std::array<nn::Tensor<T>, 4> grad_logits;  // scaled by alpha / beta
};

// Data terms and logit gradients for one batch. The L2 term is evaluated
// over `params` when non-empty; its gradient is added separately with
// nn::add_l2_gradient.
template <typename T>
EncoderLossResult<T> encoder_loss(const EncoderOutput<T>& out,
                                  const nn::Tensor<T>& targets,
                                  const EncoderLossConfig& cfg,
                                  const nn::LossConfig& reg,
                                  const std::vector<nn::Parameter<T>*>& params);

}  // namespace asc::encoder

#endif  // ASC_ENCODER_ENCODER_HPP_
