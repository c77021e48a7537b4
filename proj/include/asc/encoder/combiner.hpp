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

// Merges the three branch features into one vector of the same width.
//
//   Sum: x_lm + x_ga + x_cq
//   Max: elementwise max
//   Lin: ReLU(x_lm * w_lm + x_ga * w_ga + x_cq * w_cq + w_bias)  (elementwise)

#ifndef ASC_ENCODER_COMBINER_HPP_
#define ASC_ENCODER_COMBINER_HPP_

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "asc/nn/layers.hpp"
#include "asc/nn/tensor.hpp"

namespace asc::encoder {

enum class CombinerKind { kSum, kMax, kLin };

inline constexpr std::array<CombinerKind, 3> kAllCombiners = {
    CombinerKind::kSum, CombinerKind::kMax, CombinerKind::kLin};

std::string_view to_string(CombinerKind kind);
CombinerKind combiner_kind_from_string(std::string_view name);

template <typename T>
class Combiner {
 public:
  // Lin weights start at 1 and the bias at 0, i.e. ReLU of the sum.
  explicit Combiner(CombinerKind kind, std::size_t dim = 256);

  CombinerKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }

  // Inputs are [N, dim] each. Max routes gradient to the first maximal
  // input on ties.
  nn::Tensor<T> forward(const nn::Tensor<T>& lm, const nn::Tensor<T>& ga,
                        const nn::Tensor<T>& cq);
  nn::Tensor<T> infer(const nn::Tensor<T>& lm, const nn::Tensor<T>& ga,
                      const nn::Tensor<T>& cq) const;
  std::array<nn::Tensor<T>, 3> backward(const nn::Tensor<T>& grad_out);

  // Empty for Sum and Max; w_lm, w_ga, w_cq, w_bias for Lin.
  std::vector<nn::Parameter<T>*> parameters();

 private:
  void check(const nn::Tensor<T>& lm, const nn::Tensor<T>& ga,
             const nn::Tensor<T>& cq) const;
  nn::Tensor<T> evaluate(const nn::Tensor<T>& lm, const nn::Tensor<T>& ga,
                         const nn::Tensor<T>& cq) const;

  CombinerKind kind_;
  std::size_t dim_;
  std::array<nn::Parameter<T>, 3> weights_;
  nn::Parameter<T> bias_;
  std::array<nn::Tensor<T>, 3> inputs_;
  nn::Tensor<T> output_;
  bool cached_ = false;
};

}  // namespace asc::encoder

#endif  // ASC_ENCODER_COMBINER_HPP_
