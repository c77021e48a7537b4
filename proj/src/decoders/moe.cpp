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

#include "asc/decoders/moe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asc::decoders {

using nn::Tensor;

namespace {

template <typename T>
Tensor<T> he_tensor(nn::Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-nn::he_uniform_limit(fan_in),
                                              nn::he_uniform_limit(fan_in));
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

}  // namespace

template <typename T>
MoELayer<T>::MoELayer(std::size_t in_features, std::size_t n_classes,
                      std::size_t n_experts, std::mt19937_64& rng)
    : in_(in_features), c_(n_classes), k_(n_experts) {
  if (in_ == 0 || c_ == 0 || k_ == 0) {
    throw std::invalid_argument("MoELayer: dimensions must be > 0");
  }
  expert_weight_ = nn::Parameter<T>(
      "experts.weight", he_tensor<T>({k_, in_, c_}, in_, rng));
  expert_bias_ = nn::Parameter<T>("experts.bias", Tensor<T>({k_, c_}));
  gate_weight_ =
      nn::Parameter<T>("gate.weight", he_tensor<T>({in_, k_}, in_, rng));
  gate_bias_ = nn::Parameter<T>("gate.bias", Tensor<T>({k_}));
}

template <typename T>
nn::Shape MoELayer<T>::output_shape(const nn::Shape& input) const {
  if (input != nn::Shape{in_}) {
    throw std::invalid_argument("MoE expects [" + std::to_string(in_) +
                                "], got " + nn::shape_string(input));
  }
  return {c_};
}

template <typename T>
void MoELayer<T>::check(const Tensor<T>& x) const {
  if (x.rank() != 2 || x.dim(1) != in_) {
    throw std::invalid_argument("MoE: expected [N, " + std::to_string(in_) +
                                "], got " + nn::shape_string(x.shape()));
  }
}

template <typename T>
Tensor<T> MoELayer<T>::gate(const Tensor<T>& x) const {
  check(x);
  const std::size_t n = x.dim(0);
  Tensor<T> g({n, k_});
  for (std::size_t r = 0; r < n; ++r) {
    const T* xr = x.data() + r * in_;
    T* gr = g.data() + r * k_;
    for (std::size_t k = 0; k < k_; ++k) {
      double z = gate_bias_.value[k];
      for (std::size_t i = 0; i < in_; ++i) {
        z += static_cast<double>(xr[i]) * gate_weight_.value[i * k_ + k];
      }
      gr[k] = static_cast<T>(z);
    }
    const T peak = *std::max_element(gr, gr + k_);
    double sum = 0.0;
    for (std::size_t k = 0; k < k_; ++k) {
      gr[k] = static_cast<T>(std::exp(static_cast<double>(gr[k] - peak)));
      sum += gr[k];
    }
    for (std::size_t k = 0; k < k_; ++k) {
      gr[k] = static_cast<T>(gr[k] / sum);
    }
  }
  return g;
}

template <typename T>
Tensor<T> MoELayer<T>::experts(const Tensor<T>& x) const {
  check(x);
  const std::size_t n = x.dim(0);
  Tensor<T> e({n, k_, c_});
  for (std::size_t r = 0; r < n; ++r) {
    const T* xr = x.data() + r * in_;
    for (std::size_t k = 0; k < k_; ++k) {
      const T* w = expert_weight_.value.data() + k * in_ * c_;
      T* er = e.data() + (r * k_ + k) * c_;
      for (std::size_t c = 0; c < c_; ++c) er[c] = expert_bias_.value[k * c_ + c];
      for (std::size_t i = 0; i < in_; ++i) {
        const T xi = xr[i];
        if (xi == T(0)) continue;
        for (std::size_t c = 0; c < c_; ++c) er[c] += xi * w[i * c_ + c];
      }
      for (std::size_t c = 0; c < c_; ++c) er[c] = std::max(er[c], T(0));
    }
  }
  return e;
}

template <typename T>
Tensor<T> MoELayer<T>::combine(const Tensor<T>& g, const Tensor<T>& e) const {
  const std::size_t n = g.dim(0);
  Tensor<T> s({n, c_});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < k_; ++k) {
      const T gk = g[r * k_ + k];
      const T* er = e.data() + (r * k_ + k) * c_;
      for (std::size_t c = 0; c < c_; ++c) s[r * c_ + c] += gk * er[c];
    }
  }
  return s;
}

template <typename T>
Tensor<T> MoELayer<T>::forward(const Tensor<T>& x, nn::Mode) {
  gate_ = gate(x);
  experts_ = experts(x);
  input_ = x;
  cached_ = true;
  return combine(gate_, experts_);
}

template <typename T>
Tensor<T> MoELayer<T>::infer(const Tensor<T>& x) const {
  return combine(gate(x), experts(x));
}

template <typename T>
Tensor<T> MoELayer<T>::backward(const Tensor<T>& grad_out) {
  if (!cached_) throw std::logic_error("MoE: backward called before forward");
  const std::size_t n = input_.dim(0);
  if (grad_out.shape() != nn::Shape{n, c_}) {
    throw std::invalid_argument("MoE::backward: gradient shape mismatch");
  }
  Tensor<T> dx(input_.shape());
  std::vector<T> dg(k_), dz(k_), da(c_);
  for (std::size_t r = 0; r < n; ++r) {
    const T* xr = input_.data() + r * in_;
    const T* ds = grad_out.data() + r * c_;
    const T* gr = gate_.data() + r * k_;
    T* dxr = dx.data() + r * in_;
    double dot = 0.0;
    for (std::size_t k = 0; k < k_; ++k) {
      const T* er = experts_.data() + (r * k_ + k) * c_;
      T acc = 0;
      for (std::size_t c = 0; c < c_; ++c) acc += ds[c] * er[c];
      dg[k] = acc;
      dot += static_cast<double>(gr[k]) * acc;
      // Expert path: dE = g_k ds, masked by the ReLU.
      bool any = false;
      for (std::size_t c = 0; c < c_; ++c) {
        da[c] = er[c] > T(0) ? gr[k] * ds[c] : T(0);
        any |= da[c] != T(0);
      }
      if (!any) continue;
      T* dw = expert_weight_.grad.data() + k * in_ * c_;
      const T* w = expert_weight_.value.data() + k * in_ * c_;
      for (std::size_t c = 0; c < c_; ++c) expert_bias_.grad[k * c_ + c] += da[c];
      for (std::size_t i = 0; i < in_; ++i) {
        T acc_x = 0;
        for (std::size_t c = 0; c < c_; ++c) {
          dw[i * c_ + c] += xr[i] * da[c];
          acc_x += w[i * c_ + c] * da[c];
        }
        dxr[i] += acc_x;
      }
    }
    // Gate path through the softmax.
    for (std::size_t k = 0; k < k_; ++k) {
      dz[k] = static_cast<T>(gr[k] * (dg[k] - dot));
      gate_bias_.grad[k] += dz[k];
    }
    for (std::size_t i = 0; i < in_; ++i) {
      T acc_x = 0;
      for (std::size_t k = 0; k < k_; ++k) {
        gate_weight_.grad[i * k_ + k] += xr[i] * dz[k];
        acc_x += gate_weight_.value[i * k_ + k] * dz[k];
      }
      dxr[i] += acc_x;
    }
  }
  return dx;
}

template class MoELayer<float>;
template class MoELayer<double>;

}  // namespace asc::decoders
