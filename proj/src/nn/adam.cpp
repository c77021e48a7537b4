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

#include "asc/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace asc::nn {

template <typename T>
void Adam<T>::bind(const std::vector<Parameter<T>*>& params) {
  if (m_.size() == params.size()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (m_[i].shape() != params[i]->value.shape() ||
          v_[i].shape() != params[i]->value.shape()) {
        throw std::invalid_argument("Adam: moment shape mismatch for " +
                                    params[i]->name);
      }
    }
    return;
  }
  if (!m_.empty()) {
    throw std::invalid_argument("Adam: parameter list changed size");
  }
  for (const Parameter<T>* p : params) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

template <typename T>
void Adam<T>::step(const std::vector<Parameter<T>*>& params) {
  bind(params);
  ++steps_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = cfg_.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    if (p.grad.shape() != p.value.shape()) {
      throw std::invalid_argument("Adam: gradient shape mismatch for " +
                                  p.name);
    }
    T* m = m_[i].data();
    T* v = v_[i].data();
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      const double mj = b1 * m[j] + (1.0 - b1) * g;
      const double vj = b2 * v[j] + (1.0 - b2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double m_hat = mj / correction1;
      const double v_hat = vj / correction2;
      p.value[j] -= static_cast<T>(lr * m_hat /
                                   (std::sqrt(v_hat) + cfg_.epsilon));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace asc::nn
