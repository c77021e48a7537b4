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

// Per-ISA kernel entry points. This header is included by the ISA-specific
// translation units, some of which are compiled freestanding, so it must not
// pull in any standard library headers.

#ifndef ASC_SRC_KERNELS_KERNEL_DECLS_HPP_
#define ASC_SRC_KERNELS_KERNEL_DECLS_HPP_

#define ASC_DECLARE_KERNELS(ns)                                               \
  namespace asc::kernels::ns {                                                \
  void gemm(bool trans_a, bool trans_b, long m, long n, long k, float alpha,  \
            const float* a, long lda, const float* b, long ldb, float beta,   \
            float* c, long ldc);                                              \
  float dot(const float* x, const float* y, long n);                          \
  void axpy(long n, float alpha, const float* x, float* y);                   \
  void power_spectrum(long n, const float* interleaved, float* out);          \
  void correlate(long n, long taps, const float* w, const float* x,           \
                 float* y);                                                   \
  void correlate_grad(long n, long taps, const float* dy, const float* x,     \
                      float* dw);                                             \
  }

ASC_DECLARE_KERNELS(scalar)
ASC_DECLARE_KERNELS(avx2)
ASC_DECLARE_KERNELS(neon)

#endif  // ASC_SRC_KERNELS_KERNEL_DECLS_HPP_
