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

// Mixture-of-experts output layer:
//
//   e_k = ReLU(x W_k + b_k)            k = 1..K, each [C]
//   g   = softmax(x W_g + b_g)         [K]
//   s   = sum_k g_k e_k                [C]   (logits; softmax is in the loss)

#ifndef ASC_DECODERS_MOE_HPP_
#define ASC_DECODERS_MOE_HPP_

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "asc/nn/layers.hpp"

namespace asc::decoders {

template <typename T>
class MoELayer final : public nn::Layer<T> {
 public:
  MoELayer(std::size_t in_features, std::size_t n_classes,
           std::size_t n_experts, std::mt19937_64& rng);

  std::string name() const override { return "MoE"; }
  nn::Shape output_shape(const nn::Shape& input) const override;
  nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Mode mode) override;
  nn::Tensor<T> infer(const nn::Tensor<T>& x) const override;
  nn::Tensor<T> backward(const nn::Tensor<T>& grad_out) override;
  std::vector<nn::Parameter<T>*> parameters() override {
    return {&expert_weight_, &expert_bias_, &gate_weight_, &gate_bias_};
  }

  std::size_t n_experts() const { return k_; }
  // [N, K] gate probabilities and [N, K, C] expert outputs.
  nn::Tensor<T> gate(const nn::Tensor<T>& x) const;
  nn::Tensor<T> experts(const nn::Tensor<T>& x) const;

  nn::Parameter<T>& expert_weight() { return expert_weight_; }  // [K, in, C]
  nn::Parameter<T>& expert_bias() { return expert_bias_; }      // [K, C]
  nn::Parameter<T>& gate_weight() { return gate_weight_; }      // [in, K]
  nn::Parameter<T>& gate_bias() { return gate_bias_; }          // [K]

 private:
  void check(const nn::Tensor<T>& x) const;
  nn::Tensor<T> combine(const nn::Tensor<T>& g, const nn::Tensor<T>& e) const;

  std::size_t in_;
  std::size_t c_;
  std::size_t k_;
  nn::Parameter<T> expert_weight_;
  nn::Parameter<T> expert_bias_;
  nn::Parameter<T> gate_weight_;
  nn::Parameter<T> gate_bias_;
  nn::Tensor<T> input_;
  nn::Tensor<T> gate_;
  nn::Tensor<T> experts_;
  bool cached_ = false;
};

}  // namespace asc::decoders

#endif  // ASC_DECODERS_MOE_HPP_
