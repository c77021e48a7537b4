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

#include <cstddef>

#include "asc/kernels/kernels.hpp"
#include "kernel_decls.hpp"

namespace asc::kernels::scalar {

void gemm(bool trans_a, bool trans_b, long m, long n, long k, float alpha,
          const float* a, long lda, const float* b, long ldb, float beta,
          float* c, long ldc) {
  gemm_ref<float>(trans_a, trans_b, static_cast<std::size_t>(m),
                  static_cast<std::size_t>(n), static_cast<std::size_t>(k),
                  alpha, a, static_cast<std::size_t>(lda), b,
                  static_cast<std::size_t>(ldb), beta, c,
                  static_cast<std::size_t>(ldc));
}

float dot(const float* x, const float* y, long n) {
  return dot_ref<float>(x, y, static_cast<std::size_t>(n));
}

void axpy(long n, float alpha, const float* x, float* y) {
  axpy_ref<float>(static_cast<std::size_t>(n), alpha, x, y);
}

void power_spectrum(long n, const float* interleaved, float* out) {
  for (long i = 0; i < n; ++i) {
    const float re = interleaved[2 * i];
    const float im = interleaved[2 * i + 1];
    out[i] = re * re + im * im;
  }
}

void correlate(long n, long taps, const float* w, const float* x, float* y) {
  correlate_ref<float>(static_cast<std::size_t>(n),
                       static_cast<std::size_t>(taps), w, x, y);
}

void correlate_grad(long n, long taps, const float* dy, const float* x,
                    float* dw) {
  correlate_grad_ref<float>(static_cast<std::size_t>(n),
                            static_cast<std::size_t>(taps), dy, x, dw);
}

}  // namespace asc::kernels::scalar
