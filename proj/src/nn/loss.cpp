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

#include "asc/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asc::nn {
namespace {

template <typename T>
void check_pair(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(what) + ": shapes " +
                                shape_string(a.shape()) + " and " +
                                shape_string(b.shape()) + " do not match");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) {
      throw std::invalid_argument(std::string(what) + ": NaN in input");
    }
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(l2_lambda >= 0.0)) {
    throw std::invalid_argument("LossConfig: l2_lambda must be >= 0");
  }
  if (!(log_floor > 0.0)) {
    throw std::invalid_argument("LossConfig: log_floor must be > 0");
  }
}

template <typename T>
T cross_entropy(const Tensor<T>& probs, const Tensor<T>& targets,
                double log_floor) {
  check_pair(probs, targets, "cross_entropy");
  const std::size_t rows = probs.dim(0);
  const std::size_t cols = probs.dim(1);
  if (rows == 0) throw std::invalid_argument("cross_entropy: empty batch");
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) row_sum += probs[r * cols + c];
    if (std::abs(row_sum - 1.0) > 1e-5) {
      throw std::invalid_argument("cross_entropy: row " + std::to_string(r) +
                                  " does not sum to 1");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const double y = targets[r * cols + c];
      if (y == 0.0) continue;
      total -= y * std::log(std::max<double>(probs[r * cols + c], log_floor));
    }
  }
  return static_cast<T>(total / static_cast<double>(rows));
}

template <typename T>
T l2_penalty(const std::vector<Parameter<T>*>& params, double lambda) {
  double sum_sq = 0.0;
  for (const Parameter<T>* p : params) {
    for (T v : p->value.values()) sum_sq += static_cast<double>(v) * v;
  }
  return static_cast<T>(0.5 * lambda * sum_sq);
}

template <typename T>
T cross_entropy_l2(const Tensor<T>& probs, const Tensor<T>& targets,
                   const std::vector<Parameter<T>*>& params,
                   const LossConfig& cfg) {
  cfg.validate();
  return cross_entropy(probs, targets, cfg.log_floor) +
         l2_penalty(params, cfg.l2_lambda);
}

template <typename T>
void add_l2_gradient(const std::vector<Parameter<T>*>& params, double lambda) {
  if (lambda == 0.0) return;
  const T l = static_cast<T>(lambda);
  for (Parameter<T>* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->grad[i] += l * p->value[i];
    }
  }
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  return Softmax<T>().infer(logits);
}

template <typename T>
SoftmaxCrossEntropy<T> softmax_cross_entropy(const Tensor<T>& logits,
                                             const Tensor<T>& targets,
                                             double log_floor, T grad_scale) {
  check_pair(logits, targets, "softmax_cross_entropy");
  SoftmaxCrossEntropy<T> out{T(0), softmax_rows(logits),
                             Tensor<T>(logits.shape())};
  out.loss = cross_entropy(out.probs, targets, log_floor);
  const T scale = grad_scale / static_cast<T>(logits.dim(0));
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.grad_logits[i] = scale * (out.probs[i] - targets[i]);
  }
  return out;
}

#define ASC_INSTANTIATE_LOSS(T)                                             \
  template T cross_entropy<T>(const Tensor<T>&, const Tensor<T>&, double);  \
  template T l2_penalty<T>(const std::vector<Parameter<T>*>&, double);         \
  template T cross_entropy_l2<T>(const Tensor<T>&, const Tensor<T>&,        \
                                 const std::vector<Parameter<T>*>&,            \
                                 const LossConfig&);                        \
  template void add_l2_gradient<T>(const std::vector<Parameter<T>*>&, double); \
  template Tensor<T> softmax_rows<T>(const Tensor<T>&);                     \
  template SoftmaxCrossEntropy<T> softmax_cross_entropy<T>(                 \
      const Tensor<T>&, const Tensor<T>&, double, T);

ASC_INSTANTIATE_LOSS(float)
ASC_INSTANTIATE_LOSS(double)

}  // namespace asc::nn
