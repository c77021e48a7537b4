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

#ifndef ASC_NN_SEQUENTIAL_HPP_
#define ASC_NN_SEQUENTIAL_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "asc/nn/layers.hpp"
#include "asc/util/seed.hpp"

namespace asc::nn {

using asc::derive_seed;

// A chain of layers with the per-sample shape validated at every link.
template <typename T>
class Sequential {
 public:
  Sequential() = default;
  explicit Sequential(Shape input_shape);
  Sequential(Shape input_shape, const std::vector<LayerSpec>& specs,
             std::uint64_t seed);

  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  // Appends a built-in layer; its parameters are seeded from (seed, index).
  void add(const LayerSpec& spec, std::uint64_t seed);
  // Appends a custom layer. Throws if its input shape does not fit.
  void add(std::unique_ptr<Layer<T>> layer);

  const Shape& input_shape() const { return input_shape_; }
  Shape output_shape() const;
  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }

  Tensor<T> forward(const Tensor<T>& x, Mode mode);
  Tensor<T> infer(const Tensor<T>& x) const;
  Tensor<T> backward(const Tensor<T>& grad_out);

  // Parameters and buffers named "<layer index>.<name>".
  std::vector<Parameter<T>*> parameters();
  std::vector<NamedBuffer<T>> buffers();
  std::size_t parameter_count();
  void zero_grad();

 private:
  void check_input(const Tensor<T>& x) const;

  Shape input_shape_;
  std::vector<Shape> shapes_;  // output shape of each layer
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace asc::nn

#endif  // ASC_NN_SEQUENTIAL_HPP_
