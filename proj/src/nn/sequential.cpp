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

#include "asc/nn/sequential.hpp"

#include <stdexcept>

namespace asc::nn {

template <typename T>
Sequential<T>::Sequential(Shape input_shape)
    : input_shape_(std::move(input_shape)) {}

template <typename T>
Sequential<T>::Sequential(Shape input_shape,
                          const std::vector<LayerSpec>& specs,
                          std::uint64_t seed)
    : input_shape_(std::move(input_shape)) {
  for (const auto& spec : specs) add(spec, seed);
}

template <typename T>
Shape Sequential<T>::output_shape() const {
  return shapes_.empty() ? input_shape_ : shapes_.back();
}

template <typename T>
void Sequential<T>::add(const LayerSpec& spec, std::uint64_t seed) {
  const Shape in = output_shape();
  try {
    add(build_layer<T>(spec, in, derive_seed(seed, layers_.size())));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("layer " + std::to_string(layers_.size()) +
                                " (" + to_string(spec.kind) +
                                "): " + e.what());
  }
}

template <typename T>
void Sequential<T>::add(std::unique_ptr<Layer<T>> layer) {
  const std::size_t index = layers_.size();
  Shape out;
  try {
    out = layer->output_shape(output_shape());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("layer " + std::to_string(index) + " (" +
                                layer->name() + "): " + e.what());
  }
  for (Parameter<T>* p : layer->parameters()) {
    p->name = std::to_string(index) + "." + p->name;
  }
  shapes_.push_back(std::move(out));
  layers_.push_back(std::move(layer));
}

template <typename T>
void Sequential<T>::check_input(const Tensor<T>& x) const {
  if (x.rank() != input_shape_.size() + 1 || x.sample_shape() != input_shape_) {
    throw std::invalid_argument(
        "layer 0 (" + (layers_.empty() ? std::string("input") : layers_[0]->name()) +
        "): expected per-sample input " + shape_string(input_shape_) +
        ", got batch " + shape_string(x.shape()));
  }
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
  check_input(x);
  Tensor<T> h = x;
  for (auto& layer : layers_) h = layer->forward(h, mode);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::infer(const Tensor<T>& x) const {
  check_input(x);
  Tensor<T> h = x;
  for (const auto& layer : layers_) h = layer->infer(h);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
  return g;
}

template <typename T>
std::vector<Parameter<T>*> Sequential<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& layer : layers_) {
    for (Parameter<T>* p : layer->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::vector<NamedBuffer<T>> Sequential<T>::buffers() {
  std::vector<NamedBuffer<T>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (NamedBuffer<T> b : layers_[i]->buffers()) {
      b.name = std::to_string(i) + "." + b.name;
      out.push_back(b);
    }
  }
  return out;
}

template <typename T>
std::size_t Sequential<T>::parameter_count() {
  std::size_t total = 0;
  for (Parameter<T>* p : parameters()) total += p->value.size();
  return total;
}

template <typename T>
void Sequential<T>::zero_grad() {
  for (Parameter<T>* p : parameters()) p->grad.fill(T(0));
}

template class Sequential<float>;
template class Sequential<double>;

}  // namespace asc::nn
