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

#include "asc/encoder/combiner.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace asc::encoder {

using nn::Tensor;

std::string_view to_string(CombinerKind kind) {
  switch (kind) {
    case CombinerKind::kSum: return "sum";
    case CombinerKind::kMax: return "max";
    case CombinerKind::kLin: return "lin";
  }
  return "?";
}

CombinerKind combiner_kind_from_string(std::string_view name) {
  if (name == "sum" || name == "sum-comb") return CombinerKind::kSum;
  if (name == "max" || name == "max-comb") return CombinerKind::kMax;
  if (name == "lin" || name == "lin-comb") return CombinerKind::kLin;
  throw std::invalid_argument("unknown combiner '" + std::string(name) +
                              "' (expected sum, max or lin)");
}

template <typename T>
Combiner<T>::Combiner(CombinerKind kind, std::size_t dim)
    : kind_(kind), dim_(dim) {
  if (dim == 0) throw std::invalid_argument("Combiner: dim must be > 0");
  if (kind_ == CombinerKind::kLin) {
    const char* names[3] = {"w_lm", "w_ga", "w_cq"};
    for (int b = 0; b < 3; ++b) {
      weights_[b] = nn::Parameter<T>(names[b], Tensor<T>({dim}, T(1)));
    }
    bias_ = nn::Parameter<T>("w_bias", Tensor<T>({dim}, T(0)));
  }
}

template <typename T>
std::vector<nn::Parameter<T>*> Combiner<T>::parameters() {
  if (kind_ != CombinerKind::kLin) return {};
  return {&weights_[0], &weights_[1], &weights_[2], &bias_};
}

template <typename T>
void Combiner<T>::check(const Tensor<T>& lm, const Tensor<T>& ga,
                        const Tensor<T>& cq) const {
  for (const Tensor<T>* x : {&lm, &ga, &cq}) {
    if (x->rank() != 2 || x->dim(1) != dim_ || x->shape() != lm.shape()) {
      throw std::invalid_argument(
          "Combiner: expected three [N, " + std::to_string(dim_) +
          "] inputs, got " + nn::shape_string(lm.shape()) + ", " +
          nn::shape_string(ga.shape()) + ", " + nn::shape_string(cq.shape()));
    }
  }
}

template <typename T>
Tensor<T> Combiner<T>::evaluate(const Tensor<T>& lm, const Tensor<T>& ga,
                                const Tensor<T>& cq) const {
  check(lm, ga, cq);
  Tensor<T> y(lm.shape());
  const std::size_t n = lm.size();
  switch (kind_) {
    case CombinerKind::kSum:
      for (std::size_t i = 0; i < n; ++i) y[i] = lm[i] + ga[i] + cq[i];
      break;
    case CombinerKind::kMax:
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::max(lm[i], std::max(ga[i], cq[i]));
      }
      break;
    case CombinerKind::kLin: {
      const T* w0 = weights_[0].value.data();
      const T* w1 = weights_[1].value.data();
      const T* w2 = weights_[2].value.data();
      const T* wb = bias_.value.data();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t d = i % dim_;
        const T z = lm[i] * w0[d] + ga[i] * w1[d] + cq[i] * w2[d] + wb[d];
        y[i] = z > T(0) ? z : T(0);
      }
      break;
    }
  }
  return y;
}

template <typename T>
Tensor<T> Combiner<T>::forward(const Tensor<T>& lm, const Tensor<T>& ga,
                               const Tensor<T>& cq) {
  output_ = evaluate(lm, ga, cq);
  inputs_ = {lm, ga, cq};
  cached_ = true;
  return output_;
}

template <typename T>
Tensor<T> Combiner<T>::infer(const Tensor<T>& lm, const Tensor<T>& ga,
                             const Tensor<T>& cq) const {
  return evaluate(lm, ga, cq);
}

template <typename T>
std::array<Tensor<T>, 3> Combiner<T>::backward(const Tensor<T>& grad_out) {
  if (!cached_) throw std::logic_error("Combiner: backward before forward");
  if (grad_out.shape() != output_.shape()) {
    throw std::invalid_argument("Combiner: gradient shape mismatch");
  }
  const nn::Shape shape = grad_out.shape();
  std::array<Tensor<T>, 3> dx = {Tensor<T>(shape), Tensor<T>(shape),
                                 Tensor<T>(shape)};
  const std::size_t n = grad_out.size();
  switch (kind_) {
    case CombinerKind::kSum:
      for (int b = 0; b < 3; ++b) dx[b] = grad_out;
      break;
    case CombinerKind::kMax:
      for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        for (int b = 1; b < 3; ++b) {
          if (inputs_[b][i] > inputs_[best][i]) best = b;
        }
        dx[best][i] = grad_out[i];
      }
      break;
    case CombinerKind::kLin:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(output_[i] > T(0))) continue;
        const std::size_t d = i % dim_;
        const T g = grad_out[i];
        for (int b = 0; b < 3; ++b) {
          dx[b][i] = g * weights_[b].value[d];
          weights_[b].grad[d] += g * inputs_[b][i];
        }
        bias_.grad[d] += g;
      }
      break;
  }
  return dx;
}

template class Combiner<float>;
template class Combiner<double>;

}  // namespace asc::encoder
