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

#include "asc/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

#include "asc/kernels/kernels.hpp"

namespace asc::nn {
namespace {

void require_cached(bool cached, const char* layer) {
  if (!cached) {
    throw std::logic_error(std::string(layer) +
                           ": backward called without a cached forward pass");
  }
}

void require_rank(const Shape& shape, std::size_t rank, const char* layer) {
  if (shape.size() != rank) {
    throw std::invalid_argument(std::string(layer) + ": expected rank-" +
                                std::to_string(rank) + " input, got " +
                                shape_string(shape));
  }
}

template <typename T>
Tensor<T> he_uniform(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double limit = he_uniform_limit(fan_in);
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

// Unfolds one [C, H, W] image into [C * kh * kw, H * W] columns for a
// same-padded, stride-1 convolution.
template <typename T>
void im2col(const T* image, std::size_t channels, std::size_t height,
            std::size_t width, std::size_t kh, std::size_t kw, T* col) {
  const long pad_h = static_cast<long>(kh / 2);
  const long pad_w = static_cast<long>(kw / 2);
  const long h_len = static_cast<long>(height);
  const long w_len = static_cast<long>(width);
  const std::size_t plane = height * width;
  for (std::size_t c = 0; c < channels; ++c) {
    const T* src = image + c * plane;
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        T* dst = col + ((c * kh + i) * kw + j) * plane;
        const long dy = static_cast<long>(i) - pad_h;
        const long dx = static_cast<long>(j) - pad_w;
        const long w_lo = std::max(0L, -dx);
        const long w_hi = std::min(w_len, w_len - dx);
        for (long h = 0; h < h_len; ++h) {
          T* out_row = dst + h * w_len;
          const long sh = h + dy;
          if (sh < 0 || sh >= h_len || w_lo >= w_hi) {
            std::fill(out_row, out_row + w_len, T(0));
            continue;
          }
          std::fill(out_row, out_row + w_lo, T(0));
          std::memcpy(out_row + w_lo, src + sh * w_len + w_lo + dx,
                      static_cast<std::size_t>(w_hi - w_lo) * sizeof(T));
          std::fill(out_row + w_hi, out_row + w_len, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, std::size_t channels, std::size_t height,
            std::size_t width, std::size_t kh, std::size_t kw, T* image) {
  const long pad_h = static_cast<long>(kh / 2);
  const long pad_w = static_cast<long>(kw / 2);
  const long h_len = static_cast<long>(height);
  const long w_len = static_cast<long>(width);
  const std::size_t plane = height * width;
  for (std::size_t c = 0; c < channels; ++c) {
    T* dst = image + c * plane;
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        const T* src = col + ((c * kh + i) * kw + j) * plane;
        const long dy = static_cast<long>(i) - pad_h;
        const long dx = static_cast<long>(j) - pad_w;
        const long w_lo = std::max(0L, -dx);
        const long w_hi = std::min(w_len, w_len - dx);
        if (w_lo >= w_hi) continue;
        for (long h = 0; h < h_len; ++h) {
          const long sh = h + dy;
          if (sh < 0 || sh >= h_len) continue;
          kernels::axpy_t<T>(static_cast<std::size_t>(w_hi - w_lo), T(1),
                             src + h * w_len + w_lo,
                             dst + sh * w_len + w_lo + dx);
        }
      }
    }
  }
}

// Copies one [H, W] plane into the centre of a zeroed
// [H + 2 * pad_h, W + 2 * pad_w] buffer.
template <typename T>
void pad_plane(const T* src, std::size_t height, std::size_t width,
               std::size_t pad_h, std::size_t pad_w, T* dst) {
  const std::size_t pw = width + 2 * pad_w;
  std::fill(dst, dst + (height + 2 * pad_h) * pw, T(0));
  for (std::size_t h = 0; h < height; ++h) {
    std::memcpy(dst + (h + pad_h) * pw + pad_w, src + h * width,
                width * sizeof(T));
  }
}

// Sum over a contiguous run with independent partial sums, so the loop is
// not serialized on one accumulator. Partial sums are folded in double.
template <typename T>
double blocked_sum(const T* x, std::size_t n) {
  T part[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) part[j] += x[i + j];
  }
  double total = 0.0;
  for (T p : part) total += p;
  for (; i < n; ++i) total += x[i];
  return total;
}

template <typename T>
double blocked_dot(const T* x, const T* y, std::size_t n) {
  T part[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) part[j] += x[i + j] * y[i + j];
  }
  double total = 0.0;
  for (T p : part) total += p;
  for (; i < n; ++i) total += static_cast<double>(x[i]) * y[i];
  return total;
}

// Sum of squared deviations from `mean`.
template <typename T>
double blocked_sq_dev(const T* x, T mean, std::size_t n) {
  T part[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      const T d = x[i + j] - mean;
      part[j] += d * d;
    }
  }
  double total = 0.0;
  for (T p : part) total += p;
  for (; i < n; ++i) {
    const double d = static_cast<double>(x[i]) - mean;
    total += d * d;
  }
  return total;
}

struct ChannelLayout {
  std::size_t batch;
  std::size_t channels;
  std::size_t spatial;
};

ChannelLayout channel_layout(const Shape& shape, const char* layer) {
  if (shape.size() == 2) return {shape[0], shape[1], 1};
  if (shape.size() == 4) return {shape[0], shape[1], shape[2] * shape[3]};
  throw std::invalid_argument(std::string(layer) +
                              ": expected [N,C] or [N,C,H,W], got " +
                              shape_string(shape));
}

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2D:
      return "conv2d";
    case LayerKind::kBatchNorm:
      return "batchnorm";
    case LayerKind::kReLU:
      return "relu";
    case LayerKind::kAvgPool:
      return "avgpool";
    case LayerKind::kGlobalAvgPool:
      return "globalavgpool";
    case LayerKind::kDropout:
      return "dropout";
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kSoftmax:
      return "softmax";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  for (LayerKind k :
       {LayerKind::kConv2D, LayerKind::kBatchNorm, LayerKind::kReLU,
        LayerKind::kAvgPool, LayerKind::kGlobalAvgPool, LayerKind::kDropout,
        LayerKind::kDense, LayerKind::kSoftmax}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown layer kind: " + name);
}

double he_uniform_limit(std::size_t fan_in) {
  return std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
}

// ---------------------------------------------------------------- Conv2D

template <typename T>
Conv2D<T>::Conv2D(std::size_t in_channels, std::size_t out_channels,
                  std::size_t kernel_h, std::size_t kernel_w,
                  std::mt19937_64& rng)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_h_(kernel_h),
      kernel_w_(kernel_w) {
  if (kernel_h % 2 == 0 || kernel_w % 2 == 0) {
    throw std::invalid_argument("Conv2D: kernel sizes must be odd");
  }
  if (in_channels == 0 || out_channels == 0) {
    throw std::invalid_argument("Conv2D: channel counts must be positive");
  }
  const std::size_t fan_in = in_channels * kernel_h * kernel_w;
  weight_ = Parameter<T>("weight",
                         he_uniform<T>({out_channels, fan_in}, fan_in, rng));
  bias_ = Parameter<T>("bias", Tensor<T>({out_channels}));
}

template <typename T>
Shape Conv2D<T>::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != in_channels_) {
    throw std::invalid_argument("Conv2D: expected [" +
                                std::to_string(in_channels_) +
                                ",H,W] input, got " + shape_string(input));
  }
  return {out_channels_, input[1], input[2]};
}

template <typename T>
ConvAlgorithm Conv2D<T>::algorithm_for(std::size_t width) const {
  if (algo_ != ConvAlgorithm::kAuto) return algo_;
  return width >= 32 && in_channels_ * out_channels_ <= 32
             ? ConvAlgorithm::kDirect
             : ConvAlgorithm::kIm2col;
}

template <typename T>
void Conv2D<T>::forward_direct(const T* x, std::size_t height,
                               std::size_t width, T* y) const {
  const std::size_t plane = height * width;
  const std::size_t pw = width + kernel_w_ - 1;
  const std::size_t padded = (height + kernel_h_ - 1) * pw;
  std::vector<T> pad(in_channels_ * padded);
  for (std::size_t c = 0; c < in_channels_; ++c) {
    pad_plane(x + c * plane, height, width, kernel_h_ / 2, kernel_w_ / 2,
              pad.data() + c * padded);
  }
  const T* w = weight_.value.data();
  for (std::size_t o = 0; o < out_channels_; ++o) {
    T* out = y + o * plane;
    std::fill(out, out + plane, bias_.value[o]);
    for (std::size_t c = 0; c < in_channels_; ++c) {
      const T* src = pad.data() + c * padded;
      for (std::size_t i = 0; i < kernel_h_; ++i) {
        const T* taps = w + ((o * in_channels_ + c) * kernel_h_ + i) * kernel_w_;
        for (std::size_t h = 0; h < height; ++h) {
          kernels::correlate_t<T>(width, kernel_w_, taps, src + (h + i) * pw,
                                  out + h * width);
        }
      }
    }
  }
}

template <typename T>
void Conv2D<T>::backward_direct(const T* x, const T* dy, std::size_t height,
                                std::size_t width, T* dx) {
  const std::size_t plane = height * width;
  const std::size_t pw = width + kernel_w_ - 1;
  const std::size_t padded = (height + kernel_h_ - 1) * pw;
  const std::size_t taps = kernel_h_ * kernel_w_;
  std::vector<T> pad_x(in_channels_ * padded);
  for (std::size_t c = 0; c < in_channels_; ++c) {
    pad_plane(x + c * plane, height, width, kernel_h_ / 2, kernel_w_ / 2,
              pad_x.data() + c * padded);
  }
  std::vector<T> pad_dy(out_channels_ * padded);
  for (std::size_t o = 0; o < out_channels_; ++o) {
    pad_plane(dy + o * plane, height, width, kernel_h_ / 2, kernel_w_ / 2,
              pad_dy.data() + o * padded);
  }
  const T* w = weight_.value.data();
  T* dw = weight_.grad.data();
  std::vector<T> flipped(taps);
  for (std::size_t o = 0; o < out_channels_; ++o) {
    for (std::size_t c = 0; c < in_channels_; ++c) {
      const std::size_t base = (o * in_channels_ + c) * taps;
      const T* src = pad_x.data() + c * padded;
      for (std::size_t i = 0; i < kernel_h_; ++i) {
        for (std::size_t h = 0; h < height; ++h) {
          kernels::correlate_grad_t<T>(width, kernel_w_, dy + o * plane + h * width,
                                       src + (h + i) * pw,
                                       dw + base + i * kernel_w_);
        }
      }
      // The input gradient correlates the padded output gradient with the
      // kernel rotated by 180 degrees.
      for (std::size_t t = 0; t < taps; ++t) flipped[t] = w[base + taps - 1 - t];
      const T* gsrc = pad_dy.data() + o * padded;
      T* gdst = dx + c * plane;
      for (std::size_t i = 0; i < kernel_h_; ++i) {
        for (std::size_t h = 0; h < height; ++h) {
          kernels::correlate_t<T>(width, kernel_w_,
                                  flipped.data() + i * kernel_w_,
                                  gsrc + (h + i) * pw, gdst + h * width);
        }
      }
    }
  }
}

template <typename T>
Tensor<T> Conv2D<T>::infer(const Tensor<T>& x) const {
  require_rank(x.shape(), 4, "Conv2D");
  output_shape(x.sample_shape());
  const std::size_t batch = x.dim(0);
  const std::size_t height = x.dim(2);
  const std::size_t width = x.dim(3);
  const std::size_t plane = height * width;
  const std::size_t k = in_channels_ * kernel_h_ * kernel_w_;
  Tensor<T> y({batch, out_channels_, height, width});
  if (algorithm_for(width) == ConvAlgorithm::kDirect) {
    for (std::size_t n = 0; n < batch; ++n) {
      forward_direct(x.data() + n * in_channels_ * plane, height, width,
                     y.data() + n * out_channels_ * plane);
    }
    return y;
  }
  std::vector<T> col(k * plane);
  for (std::size_t n = 0; n < batch; ++n) {
    im2col(x.data() + n * in_channels_ * plane, in_channels_, height, width,
           kernel_h_, kernel_w_, col.data());
    T* out = y.data() + n * out_channels_ * plane;
    kernels::gemm_t<T>(false, false, out_channels_, plane, k, T(1),
                       weight_.value.data(), k, col.data(), plane, T(0), out,
                       plane);
    for (std::size_t o = 0; o < out_channels_; ++o) {
      const T b = bias_.value[o];
      T* row = out + o * plane;
      for (std::size_t p = 0; p < plane; ++p) row[p] += b;
    }
  }
  return y;
}

template <typename T>
Tensor<T> Conv2D<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> y = infer(x);
  input_ = x;
  cached_ = true;
  return y;
}

template <typename T>
Tensor<T> Conv2D<T>::backward(const Tensor<T>& grad_out) {
  require_cached(cached_, "Conv2D");
  const std::size_t batch = input_.dim(0);
  const std::size_t height = input_.dim(2);
  const std::size_t width = input_.dim(3);
  const std::size_t plane = height * width;
  const std::size_t k = in_channels_ * kernel_h_ * kernel_w_;
  if (grad_out.shape() != Shape{batch, out_channels_, height, width}) {
    throw std::invalid_argument("Conv2D::backward: gradient shape " +
                                shape_string(grad_out.shape()));
  }
  Tensor<T> grad_in(input_.shape());
  if (algorithm_for(width) == ConvAlgorithm::kDirect) {
    for (std::size_t n = 0; n < batch; ++n) {
      const T* dy = grad_out.data() + n * out_channels_ * plane;
      for (std::size_t o = 0; o < out_channels_; ++o) {
        T acc = 0;
        for (std::size_t p = 0; p < plane; ++p) acc += dy[o * plane + p];
        bias_.grad[o] += acc;
      }
      backward_direct(input_.data() + n * in_channels_ * plane, dy, height,
                      width, grad_in.data() + n * in_channels_ * plane);
    }
    return grad_in;
  }
  std::vector<T> col(k * plane);
  std::vector<T> dcol(k * plane);
  for (std::size_t n = 0; n < batch; ++n) {
    const T* dy = grad_out.data() + n * out_channels_ * plane;
    im2col(input_.data() + n * in_channels_ * plane, in_channels_, height,
           width, kernel_h_, kernel_w_, col.data());
    kernels::gemm_t<T>(false, true, out_channels_, k, plane, T(1), dy, plane,
                       col.data(), plane, T(1), weight_.grad.data(), k);
    for (std::size_t o = 0; o < out_channels_; ++o) {
      T acc = 0;
      const T* row = dy + o * plane;
      for (std::size_t p = 0; p < plane; ++p) acc += row[p];
      bias_.grad[o] += acc;
    }
    kernels::gemm_t<T>(true, false, k, plane, out_channels_, T(1),
                       weight_.value.data(), k, dy, plane, T(0), dcol.data(),
                       plane);
    col2im(dcol.data(), in_channels_, height, width, kernel_h_, kernel_w_,
           grad_in.data() + n * in_channels_ * plane);
  }
  return grad_in;
}

// ------------------------------------------------------------- BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(std::size_t channels, double momentum, double epsilon)
    : channels_(channels),
      momentum_(momentum),
      epsilon_(epsilon),
      gamma_("gamma", Tensor<T>({channels}, T(1))),
      beta_("beta", Tensor<T>({channels})),
      running_mean_({channels}),
      running_var_({channels}, T(1)) {}

template <typename T>
Shape BatchNorm<T>::output_shape(const Shape& input) const {
  if (input.empty() || input[0] != channels_ ||
      (input.size() != 1 && input.size() != 3)) {
    throw std::invalid_argument("BatchNorm: expected " +
                                std::to_string(channels_) +
                                " channels, got " + shape_string(input));
  }
  return input;
}

template <typename T>
Tensor<T> BatchNorm<T>::infer(const Tensor<T>& x) const {
  const ChannelLayout lay = channel_layout(x.shape(), "BatchNorm");
  output_shape(x.sample_shape());
  Tensor<T> y(x.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    const T inv = static_cast<T>(
        1.0 / std::sqrt(static_cast<double>(running_var_[c]) + epsilon_));
    const T scale = gamma_.value[c] * inv;
    const T shift = beta_.value[c] - running_mean_[c] * scale;
    for (std::size_t n = 0; n < lay.batch; ++n) {
      const std::size_t base = (n * lay.channels + c) * lay.spatial;
      for (std::size_t s = 0; s < lay.spatial; ++s) {
        y[base + s] = x[base + s] * scale + shift;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, Mode mode) {
  const ChannelLayout lay = channel_layout(x.shape(), "BatchNorm");
  output_shape(x.sample_shape());
  normalized_ = Tensor<T>(x.shape());
  inv_std_.assign(channels_, T(0));
  Tensor<T> y(x.shape());
  const double count = static_cast<double>(lay.batch * lay.spatial);
  const std::size_t sp = lay.spatial;
  for (std::size_t c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::kTrain) {
      for (std::size_t n = 0; n < lay.batch; ++n) {
        mean += blocked_sum(x.data() + (n * lay.channels + c) * sp, sp);
      }
      mean /= count;
      for (std::size_t n = 0; n < lay.batch; ++n) {
        var += blocked_sq_dev(x.data() + (n * lay.channels + c) * sp,
                              static_cast<T>(mean), sp);
      }
      var /= count;
      running_mean_[c] = static_cast<T>(momentum_ * running_mean_[c] +
                                        (1.0 - momentum_) * mean);
      running_var_[c] = static_cast<T>(momentum_ * running_var_[c] +
                                       (1.0 - momentum_) * var);
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const double inv = 1.0 / std::sqrt(var + epsilon_);
    inv_std_[c] = static_cast<T>(inv);
    const T g = gamma_.value[c];
    const T b = beta_.value[c];
    const T m = static_cast<T>(mean);
    const T is = static_cast<T>(inv);
    for (std::size_t n = 0; n < lay.batch; ++n) {
      const std::size_t base = (n * lay.channels + c) * sp;
      const T* src = x.data() + base;
      T* xhat = normalized_.data() + base;
      T* out = y.data() + base;
      for (std::size_t k = 0; k < sp; ++k) {
        xhat[k] = (src[k] - m) * is;
        out[k] = g * xhat[k] + b;
      }
    }
  }
  cached_mode_ = mode;
  cached_ = true;
  return y;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& grad_out) {
  require_cached(cached_, "BatchNorm");
  if (grad_out.shape() != normalized_.shape()) {
    throw std::invalid_argument("BatchNorm::backward: gradient shape " +
                                shape_string(grad_out.shape()));
  }
  const ChannelLayout lay = channel_layout(grad_out.shape(), "BatchNorm");
  const double count = static_cast<double>(lay.batch * lay.spatial);
  const std::size_t sp = lay.spatial;
  Tensor<T> grad_in(grad_out.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < lay.batch; ++n) {
      const std::size_t base = (n * lay.channels + c) * sp;
      sum_dy += blocked_sum(grad_out.data() + base, sp);
      sum_dy_xhat +=
          blocked_dot(grad_out.data() + base, normalized_.data() + base, sp);
    }
    gamma_.grad[c] += static_cast<T>(sum_dy_xhat);
    beta_.grad[c] += static_cast<T>(sum_dy);
    const double g = gamma_.value[c];
    const double inv = inv_std_[c];
    // Train: dx = g * inv * (dy - mean(dy) - xhat * mean(dy * xhat)).
    const bool train = cached_mode_ == Mode::kTrain;
    const T k_dy = static_cast<T>(g * inv);
    const T k_const = train ? static_cast<T>(g * inv * sum_dy / count) : T(0);
    const T k_xhat =
        train ? static_cast<T>(g * inv * sum_dy_xhat / count) : T(0);
    for (std::size_t n = 0; n < lay.batch; ++n) {
      const std::size_t base = (n * lay.channels + c) * sp;
      const T* dy = grad_out.data() + base;
      const T* xhat = normalized_.data() + base;
      T* dx = grad_in.data() + base;
      for (std::size_t k = 0; k < sp; ++k) {
        dx[k] = k_dy * dy[k] - k_const - k_xhat * xhat[k];
      }
    }
  }
  return grad_in;
}

// ------------------------------------------------------------------ ReLU

template <typename T>
Tensor<T> ReLU<T>::infer(const Tensor<T>& x) const {
  Tensor<T> y(x.shape());
  const T* src = x.data();
  T* out = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = src[i] > T(0) ? src[i] : T(0);
  }
  return y;
}

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Mode) {
  input_ = x;
  cached_ = true;
  return infer(x);
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& grad_out) {
  require_cached(cached_, "ReLU");
  if (grad_out.shape() != input_.shape()) {
    throw std::invalid_argument("ReLU::backward: gradient shape mismatch");
  }
  Tensor<T> grad_in(grad_out.shape());
  const T* x = input_.data();
  const T* dy = grad_out.data();
  T* dx = grad_in.data();
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    dx[i] = x[i] > T(0) ? dy[i] : T(0);
  }
  return grad_in;
}

// --------------------------------------------------------------- AvgPool

template <typename T>
Shape AvgPool2x2<T>::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[1] < 2 || input[2] < 2) {
    throw std::invalid_argument("AvgPool: expected [C,H,W] with H,W >= 2, got " +
                                shape_string(input));
  }
  return {input[0], input[1] / 2, input[2] / 2};
}

template <typename T>
Tensor<T> AvgPool2x2<T>::infer(const Tensor<T>& x) const {
  require_rank(x.shape(), 4, "AvgPool");
  const Shape out = output_shape(x.sample_shape());
  const std::size_t batch = x.dim(0);
  const std::size_t channels = x.dim(1);
  const std::size_t width = x.dim(3);
  const std::size_t oh = out[1];
  const std::size_t ow = out[2];
  Tensor<T> y({batch, channels, oh, ow});
  for (std::size_t nc = 0; nc < batch * channels; ++nc) {
    const T* src = x.data() + nc * x.dim(2) * width;
    T* dst = y.data() + nc * oh * ow;
    for (std::size_t i = 0; i < oh; ++i) {
      const T* r0 = src + 2 * i * width;
      const T* r1 = r0 + width;
      for (std::size_t j = 0; j < ow; ++j) {
        dst[i * ow + j] =
            T(0.25) * (r0[2 * j] + r0[2 * j + 1] + r1[2 * j] + r1[2 * j + 1]);
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> AvgPool2x2<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> y = infer(x);
  input_shape_ = x.shape();
  cached_ = true;
  return y;
}

template <typename T>
Tensor<T> AvgPool2x2<T>::backward(const Tensor<T>& grad_out) {
  require_cached(cached_, "AvgPool");
  const std::size_t batch = input_shape_[0];
  const std::size_t channels = input_shape_[1];
  const std::size_t width = input_shape_[3];
  const std::size_t oh = input_shape_[2] / 2;
  const std::size_t ow = width / 2;
  if (grad_out.shape() != Shape{batch, channels, oh, ow}) {
    throw std::invalid_argument("AvgPool::backward: gradient shape mismatch");
  }
  Tensor<T> grad_in(input_shape_);
  for (std::size_t nc = 0; nc < batch * channels; ++nc) {
    const T* src = grad_out.data() + nc * oh * ow;
    T* dst = grad_in.data() + nc * input_shape_[2] * width;
    for (std::size_t i = 0; i < oh; ++i) {
      T* r0 = dst + 2 * i * width;
      T* r1 = r0 + width;
      for (std::size_t j = 0; j < ow; ++j) {
        const T g = T(0.25) * src[i * ow + j];
        r0[2 * j] = g;
        r0[2 * j + 1] = g;
        r1[2 * j] = g;
        r1[2 * j + 1] = g;
      }
    }
  }
  return grad_in;
}

// --------------------------------------------------------- GlobalAvgPool

template <typename T>
Shape GlobalAvgPool<T>::output_shape(const Shape& input) const {
  if (input.size() != 3) {
    throw std::invalid_argument("GlobalAvgPool: expected [C,H,W], got " +
                                shape_string(input));
  }
  return {input[0]};
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::infer(const Tensor<T>& x) const {
  require_rank(x.shape(), 4, "GlobalAvgPool");
  const std::size_t batch = x.dim(0);
  const std::size_t channels = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);
  Tensor<T> y({batch, channels});
  for (std::size_t nc = 0; nc < batch * channels; ++nc) {
    T acc = 0;
    const T* src = x.data() + nc * plane;
    for (std::size_t p = 0; p < plane; ++p) acc += src[p];
    y[nc] = acc / static_cast<T>(plane);
  }
  return y;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> y = infer(x);
  input_shape_ = x.shape();
  cached_ = true;
  return y;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& grad_out) {
  require_cached(cached_, "GlobalAvgPool");
  const std::size_t batch = input_shape_[0];
  const std::size_t channels = input_shape_[1];
  const std::size_t plane = input_shape_[2] * input_shape_[3];
  if (grad_out.shape() != Shape{batch, channels}) {
    throw std::invalid_argument(
        "GlobalAvgPool::backward: gradient shape mismatch");
  }
  Tensor<T> grad_in(input_shape_);
  for (std::size_t nc = 0; nc < batch * channels; ++nc) {
    const T g = grad_out[nc] / static_cast<T>(plane);
    std::fill(grad_in.data() + nc * plane, grad_in.data() + (nc + 1) * plane,
              g);
  }
  return grad_in;
}

// --------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("Dropout: rate must be in [0, 1)");
  }
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, Mode mode) {
  mask_.assign(x.size(), T(1));
  if (mode == Mode::kTrain && rate_ > 0.0) {
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    // Each 64-bit draw decides two elements from its 32-bit halves.
    const auto threshold = static_cast<std::uint64_t>(rate_ * 4294967296.0);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < mask_.size(); ++i) {
      if (i % 2 == 0) bits = rng_();
      const std::uint64_t u = i % 2 == 0 ? (bits & 0xffffffffu) : (bits >> 32);
      mask_[i] = u < threshold ? T(0) : keep_scale;
    }
  }
  cached_ = true;
  Tensor<T> y(x.shape());
  const T* src = x.data();
  const T* m = mask_.data();
  T* out = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = src[i] * m[i];
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_out) {
  require_cached(cached_, "Dropout");
  if (grad_out.size() != mask_.size()) {
    throw std::invalid_argument("Dropout::backward: gradient shape mismatch");
  }
  Tensor<T> grad_in(grad_out.shape());
  const T* dy = grad_out.data();
  const T* m = mask_.data();
  T* dx = grad_in.data();
  for (std::size_t i = 0; i < grad_in.size(); ++i) dx[i] = dy[i] * m[i];
  return grad_in;
}

// ----------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t in_features, std::size_t out_features,
                std::mt19937_64& rng)
    : in_features_(in_features), out_features_(out_features) {
  if (in_features == 0 || out_features == 0) {
    throw std::invalid_argument("Dense: dimensions must be positive");
  }
  weight_ = Parameter<T>(
      "weight", he_uniform<T>({in_features, out_features}, in_features, rng));
  bias_ = Parameter<T>("bias", Tensor<T>({out_features}));
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& input) const {
  if (input.size() != 1 || input[0] != in_features_) {
    throw std::invalid_argument("Dense: expected [" +
                                std::to_string(in_features_) + "], got " +
                                shape_string(input));
  }
  return {out_features_};
}

template <typename T>
Tensor<T> Dense<T>::infer(const Tensor<T>& x) const {
  require_rank(x.shape(), 2, "Dense");
  output_shape(x.sample_shape());
  const std::size_t batch = x.dim(0);
  Tensor<T> y({batch, out_features_});
  for (std::size_t n = 0; n < batch; ++n) {
    std::copy(bias_.value.data(), bias_.value.data() + out_features_,
              y.data() + n * out_features_);
  }
  kernels::gemm_t<T>(false, false, batch, out_features_, in_features_, T(1),
                     x.data(), in_features_, weight_.value.data(),
                     out_features_, T(1), y.data(), out_features_);
  return y;
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> y = infer(x);
  input_ = x;
  cached_ = true;
  return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out) {
  require_cached(cached_, "Dense");
  const std::size_t batch = input_.dim(0);
  if (grad_out.shape() != Shape{batch, out_features_}) {
    throw std::invalid_argument("Dense::backward: gradient shape " +
                                shape_string(grad_out.shape()));
  }
  kernels::gemm_t<T>(true, false, in_features_, out_features_, batch, T(1),
                     input_.data(), in_features_, grad_out.data(),
                     out_features_, T(1), weight_.grad.data(), out_features_);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t o = 0; o < out_features_; ++o) {
      bias_.grad[o] += grad_out[n * out_features_ + o];
    }
  }
  Tensor<T> grad_in({batch, in_features_});
  kernels::gemm_t<T>(false, true, batch, in_features_, out_features_, T(1),
                     grad_out.data(), out_features_, weight_.value.data(),
                     out_features_, T(0), grad_in.data(), in_features_);
  return grad_in;
}

// --------------------------------------------------------------- Softmax

template <typename T>
Shape Softmax<T>::output_shape(const Shape& input) const {
  if (input.size() != 1) {
    throw std::invalid_argument("Softmax: expected vector input, got " +
                                shape_string(input));
  }
  return input;
}

template <typename T>
Tensor<T> Softmax<T>::infer(const Tensor<T>& x) const {
  require_rank(x.shape(), 2, "Softmax");
  const std::size_t rows = x.dim(0);
  const std::size_t cols = x.dim(1);
  Tensor<T> y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = x.data() + r * cols;
    T* out = y.data() + r * cols;
    const T peak = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      out[c] = static_cast<T>(std::exp(static_cast<double>(in[c] - peak)));
      total += out[c];
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out[c] = static_cast<T>(out[c] / total);
    }
  }
  return y;
}

template <typename T>
Tensor<T> Softmax<T>::forward(const Tensor<T>& x, Mode) {
  output_ = infer(x);
  cached_ = true;
  return output_;
}

template <typename T>
Tensor<T> Softmax<T>::backward(const Tensor<T>& grad_out) {
  require_cached(cached_, "Softmax");
  if (grad_out.shape() != output_.shape()) {
    throw std::invalid_argument("Softmax::backward: gradient shape mismatch");
  }
  const std::size_t rows = output_.dim(0);
  const std::size_t cols = output_.dim(1);
  Tensor<T> grad_in(output_.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* y = output_.data() + r * cols;
    const T* dy = grad_out.data() + r * cols;
    double inner = 0.0;
    for (std::size_t c = 0; c < cols; ++c) inner += y[c] * dy[c];
    for (std::size_t c = 0; c < cols; ++c) {
      grad_in[r * cols + c] = static_cast<T>(y[c] * (dy[c] - inner));
    }
  }
  return grad_in;
}

// --------------------------------------------------------------- factory

template <typename T>
std::unique_ptr<Layer<T>> build_layer(const LayerSpec& spec,
                                      const Shape& input_shape,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  switch (spec.kind) {
    case LayerKind::kConv2D:
      if (input_shape.size() != 3) {
        throw std::invalid_argument("Conv2D: expected [C,H,W] input, got " +
                                    shape_string(input_shape));
      }
      return std::make_unique<Conv2D<T>>(input_shape[0], spec.units,
                                         spec.kernel_h, spec.kernel_w, rng);
    case LayerKind::kBatchNorm:
      if (input_shape.empty()) {
        throw std::invalid_argument("BatchNorm: empty input shape");
      }
      return std::make_unique<BatchNorm<T>>(input_shape[0]);
    case LayerKind::kReLU:
      return std::make_unique<ReLU<T>>();
    case LayerKind::kAvgPool:
      return std::make_unique<AvgPool2x2<T>>();
    case LayerKind::kGlobalAvgPool:
      return std::make_unique<GlobalAvgPool<T>>();
    case LayerKind::kDropout:
      return std::make_unique<Dropout<T>>(spec.rate, rng());
    case LayerKind::kDense:
      if (input_shape.size() != 1) {
        throw std::invalid_argument("Dense: expected vector input, got " +
                                    shape_string(input_shape));
      }
      return std::make_unique<Dense<T>>(input_shape[0], spec.units, rng);
    case LayerKind::kSoftmax:
      return std::make_unique<Softmax<T>>();
  }
  throw std::invalid_argument("build_layer: unknown layer kind");
}

#define ASC_INSTANTIATE_LAYERS(T)                                         \
  template class Conv2D<T>;                                               \
  template class BatchNorm<T>;                                            \
  template class ReLU<T>;                                                 \
  template class AvgPool2x2<T>;                                           \
  template class GlobalAvgPool<T>;                                        \
  template class Dropout<T>;                                              \
  template class Dense<T>;                                                \
  template class Softmax<T>;                                              \
  template std::unique_ptr<Layer<T>> build_layer<T>(const LayerSpec&,     \
                                                    const Shape&,         \
                                                    std::uint64_t);

ASC_INSTANTIATE_LAYERS(float)
ASC_INSTANTIATE_LAYERS(double)

}  // namespace asc::nn
