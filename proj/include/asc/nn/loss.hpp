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

// Cross-entropy with an L2 penalty over parameters:
//
//   loss = -(1/N) * sum_i y_i . log(p_i) + (lambda / 2) * ||theta||^2
//
// The log is clamped at log_floor so that hard zeros stay finite.

#ifndef ASC_NN_LOSS_HPP_
#define ASC_NN_LOSS_HPP_

#include <vector>

#include "asc/nn/layers.hpp"
#include "asc/nn/tensor.hpp"

namespace asc::nn {

struct LossConfig {
  double l2_lambda = 1e-4;
  double log_floor = 1e-10;

  void validate() const;
};

// Data term only. Rows of `probs` must sum to 1 within 1e-5; NaN input is
// rejected with std::invalid_argument.
template <typename T>
T cross_entropy(const Tensor<T>& probs, const Tensor<T>& targets,
                double log_floor);

template <typename T>
T l2_penalty(const std::vector<Parameter<T>*>& params, double lambda);

template <typename T>
T cross_entropy_l2(const Tensor<T>& probs, const Tensor<T>& targets,
                   const std::vector<Parameter<T>*>& params,
                   const LossConfig& cfg);

// grad += lambda * theta for every parameter.
template <typename T>
void add_l2_gradient(const std::vector<Parameter<T>*>& params, double lambda);

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits);

template <typename T>
struct SoftmaxCrossEntropy {
  T loss;                 // data term
  Tensor<T> probs;        // softmax(logits)
  Tensor<T> grad_logits;  // scale * d(loss)/d(logits) = scale * (p - y) / N
};

// Fused softmax + cross-entropy over a batch of logit rows.
template <typename T>
SoftmaxCrossEntropy<T> softmax_cross_entropy(const Tensor<T>& logits,
                                             const Tensor<T>& targets,
                                             double log_floor,
                                             T grad_scale = T(1));

}  // namespace asc::nn

#endif  // ASC_NN_LOSS_HPP_
