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

// Data-parallel inner loops shared by the DSP front-end and the network code.
//
// Every kernel has a portable scalar reference and, where the target allows,
// an AVX2+FMA (x86-64) or NEON (AArch64) variant. The variant is picked once
// at startup from the CPU feature flags and can be overridden with
// ASC_SIMD=scalar|avx2|neon or set_isa(). The float entry points dispatch;
// the templated *_ref functions are the reference semantics and also serve
// double precision (used by gradient checking).

#ifndef ASC_KERNELS_KERNELS_HPP_
#define ASC_KERNELS_KERNELS_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <type_traits>

namespace asc::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

// Best variant the running CPU supports.
Isa detected_isa();

// Variant used by the dispatching entry points.
Isa active_isa();

// Forces a variant. Throws std::invalid_argument if the CPU or the build
// does not support it.
void set_isa(Isa isa);

bool isa_supported(Isa isa);

// Row-major C = alpha * op(A) * op(B) + beta * C, with op(A) m x k and
// op(B) k x n. When beta == 0, C is overwritten without being read.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, float alpha, const float* a, std::size_t lda,
          const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc);

float dot(std::span<const float> x, std::span<const float> y);

// y += alpha * x
void axpy(float alpha, std::span<const float> x, std::span<float> y);

// out[i] = re[i]^2 + im[i]^2 for interleaved complex input of out.size()
// values.
void power_spectrum(std::span<const float> interleaved, std::span<float> out);

// 1-D valid correlation, accumulated: y[i] += sum_j w[j] * x[i + j].
// Requires x.size() == y.size() + w.size() - 1.
void correlate(std::span<const float> w, std::span<const float> x,
               std::span<float> y);

// Weight gradient of correlate(): dw[j] += sum_i dy[i] * x[i + j].
void correlate_grad(std::span<const float> dy, std::span<const float> x,
                    std::span<float> dw);

template <typename T>
void gemm_ref(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
              std::size_t k, T alpha, const T* a, std::size_t lda, const T* b,
              std::size_t ldb, T beta, T* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) {
        const T av = trans_a ? a[p * lda + i] : a[i * lda + p];
        const T bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
        acc += av * bv;
      }
      T& out = c[i * ldc + j];
      out = beta == T(0) ? alpha * acc : alpha * acc + beta * out;
    }
  }
}

template <typename T>
T dot_ref(const T* x, const T* y, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T>
void axpy_ref(std::size_t n, T alpha, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void correlate_ref(std::size_t n, std::size_t taps, const T* w, const T* x,
                   T* y) {
  for (std::size_t i = 0; i < n; ++i) {
    T acc = 0;
    for (std::size_t j = 0; j < taps; ++j) acc += w[j] * x[i + j];
    y[i] += acc;
  }
}

template <typename T>
void correlate_grad_ref(std::size_t n, std::size_t taps, const T* dy,
                        const T* x, T* dw) {
  for (std::size_t j = 0; j < taps; ++j) {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += dy[i] * x[i + j];
    dw[j] += acc;
  }
}

// Precision-generic front doors used by templated network code.
template <typename T>
void gemm_t(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
            std::size_t k, T alpha, const T* a, std::size_t lda, const T* b,
            std::size_t ldb, T beta, T* c, std::size_t ldc) {
  if constexpr (std::is_same_v<T, float>) {
    gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
  } else {
    gemm_ref<T>(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c,
                ldc);
  }
}

template <typename T>
void axpy_t(std::size_t n, T alpha, const T* x, T* y) {
  if constexpr (std::is_same_v<T, float>) {
    axpy(alpha, std::span<const float>(x, n), std::span<float>(y, n));
  } else {
    axpy_ref<T>(n, alpha, x, y);
  }
}

template <typename T>
void correlate_t(std::size_t n, std::size_t taps, const T* w, const T* x,
                 T* y) {
  if constexpr (std::is_same_v<T, float>) {
    correlate(std::span<const float>(w, taps),
              std::span<const float>(x, n + taps - 1), std::span<float>(y, n));
  } else {
    correlate_ref<T>(n, taps, w, x, y);
  }
}

template <typename T>
void correlate_grad_t(std::size_t n, std::size_t taps, const T* dy,
                      const T* x, T* dw) {
  if constexpr (std::is_same_v<T, float>) {
    correlate_grad(std::span<const float>(dy, n),
                   std::span<const float>(x, n + taps - 1),
                   std::span<float>(dw, taps));
  } else {
    correlate_grad_ref<T>(n, taps, dy, x, dw);
  }
}

}  // namespace asc::kernels

#endif  // ASC_KERNELS_KERNELS_HPP_
