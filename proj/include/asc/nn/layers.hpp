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

// Layer set with hand-written reverse-mode gradients.
//
// A layer caches what its backward pass needs during forward(). infer() is
// the const, cache-free evaluation path used for prediction on shared
// models. Parameter gradients accumulate across backward() calls until the
// owner zeroes them.

#ifndef ASC_NN_LAYERS_HPP_
#define ASC_NN_LAYERS_HPP_

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "asc/nn/tensor.hpp"

namespace asc::nn {

enum class Mode { kTrain, kEval };

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
};

// Non-trainable state that must survive a checkpoint (BatchNorm running
// statistics).
template <typename T>
struct NamedBuffer {
  std::string name;
  Tensor<T>* tensor;
};

enum class LayerKind {
  kConv2D,
  kBatchNorm,
  kReLU,
  kAvgPool,
  kGlobalAvgPool,
  kDropout,
  kDense,
  kSoftmax,
};

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kReLU;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t units = 0;  // conv output channels or dense output width
  double rate = 0.0;      // dropout rate

  static LayerSpec conv(std::size_t kernel, std::size_t out_channels) {
    return {LayerKind::kConv2D, kernel, kernel, out_channels, 0.0};
  }
  static LayerSpec batch_norm() { return {LayerKind::kBatchNorm}; }
  static LayerSpec relu() { return {LayerKind::kReLU}; }
  static LayerSpec avg_pool() { return {LayerKind::kAvgPool, 2, 2}; }
  static LayerSpec global_avg_pool() { return {LayerKind::kGlobalAvgPool}; }
  static LayerSpec dropout(double rate) {
    return {LayerKind::kDropout, 0, 0, 0, rate};
  }
  static LayerSpec dense(std::size_t units) {
    return {LayerKind::kDense, 0, 0, units, 0.0};
  }
  static LayerSpec softmax() { return {LayerKind::kSoftmax}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string name() const = 0;

  // Per-sample output shape for a per-sample input shape. Throws
  // std::invalid_argument when the input does not fit the layer.
  virtual Shape output_shape(const Shape& input) const = 0;

  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  virtual Tensor<T> infer(const Tensor<T>& x) const = 0;

  // Returns the gradient with respect to the last forward() input and
  // accumulates parameter gradients. Throws std::logic_error when no
  // forward pass is cached.
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  virtual std::vector<NamedBuffer<T>> buffers() { return {}; }
};

// kIm2col lowers to one GEMM per sample; kDirect runs row correlations and
// wins when channel counts are small relative to the image.
enum class ConvAlgorithm { kAuto, kIm2col, kDirect };

template <typename T>
class Conv2D final : public Layer<T> {
 public:
  Conv2D(std::size_t in_channels, std::size_t out_channels,
         std::size_t kernel_h, std::size_t kernel_w, std::mt19937_64& rng);

  std::string name() const override { return "Conv2D"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Parameter<T>*> parameters() override {
    return {&weight_, &bias_};
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

  void set_algorithm(ConvAlgorithm algo) { algo_ = algo; }
  // Algorithm used for an input of the given width.
  ConvAlgorithm algorithm_for(std::size_t width) const;

 private:
  void forward_direct(const T* x, std::size_t height, std::size_t width,
                      T* y) const;
  void backward_direct(const T* x, const T* dy, std::size_t height,
                       std::size_t width, T* dx);

  ConvAlgorithm algo_ = ConvAlgorithm::kAuto;
  std::size_t in_channels_;
  std::size_t out_channels_;
  std::size_t kernel_h_;
  std::size_t kernel_w_;
  Parameter<T> weight_;  // [out, in * kh * kw]
  Parameter<T> bias_;    // [out]
  Tensor<T> input_;
  bool cached_ = false;
};

// Normalizes each channel over batch and spatial positions. Accepts
// [N, C, H, W] and [N, C].
template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  explicit BatchNorm(std::size_t channels, double momentum = 0.9,
                     double epsilon = 1e-5);

  std::string name() const override { return "BatchNorm"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Parameter<T>*> parameters() override {
    return {&gamma_, &beta_};
  }
  std::vector<NamedBuffer<T>> buffers() override {
    return {{"running_mean", &running_mean_}, {"running_var", &running_var_}};
  }

  Parameter<T>& gamma() { return gamma_; }
  Parameter<T>& beta() { return beta_; }
  const Tensor<T>& running_mean() const { return running_mean_; }
  const Tensor<T>& running_var() const { return running_var_; }

 private:
  std::size_t channels_;
  double momentum_;
  double epsilon_;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;
  Tensor<T> normalized_;
  std::vector<T> inv_std_;
  Mode cached_mode_ = Mode::kEval;
  bool cached_ = false;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  std::string name() const override { return "ReLU"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  Tensor<T> input_;
  bool cached_ = false;
};

// 2x2 average pooling with stride 2; a trailing odd row/column is dropped.
template <typename T>
class AvgPool2x2 final : public Layer<T> {
 public:
  std::string name() const override { return "AvgPool"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  Shape input_shape_;
  bool cached_ = false;
};

template <typename T>
class GlobalAvgPool final : public Layer<T> {
 public:
  std::string name() const override { return "GlobalAvgPool"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  Shape input_shape_;
  bool cached_ = false;
};

// Inverted dropout: survivors are scaled by 1 / (1 - rate) in training so
// evaluation is the identity.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(double rate, std::uint64_t seed);

  std::string name() const override { return "Dropout"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> infer(const Tensor<T>& x) const override { return x; }
  Tensor<T> backward(const Tensor<T>& grad_out) override;

  double rate() const { return rate_; }

 private:
  double rate_;
  std::mt19937_64 rng_;
  std::vector<T> mask_;
  bool cached_ = false;
};

template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features,
        std::mt19937_64& rng);

  std::string name() const override { return "Dense"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Parameter<T>*> parameters() override {
    return {&weight_, &bias_};
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  std::size_t in_features_;
  std::size_t out_features_;
  Parameter<T> weight_;  // [in, out]
  Parameter<T> bias_;    // [out]
  Tensor<T> input_;
  bool cached_ = false;
};

template <typename T>
class Softmax final : public Layer<T> {
 public:
  std::string name() const override { return "Softmax"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  Tensor<T> output_;
  bool cached_ = false;
};

// He-uniform initialization bound for a given fan-in.
double he_uniform_limit(std::size_t fan_in);

template <typename T>
std::unique_ptr<Layer<T>> build_layer(const LayerSpec& spec,
                                      const Shape& input_shape,
                                      std::uint64_t seed);

}  // namespace asc::nn

#endif  // ASC_NN_LAYERS_HPP_
