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

// NEON kernels for AArch64. Kept free of standard library headers so the
// unit can be syntax-checked with a freestanding cross compiler.

#include "kernel_decls.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace asc::kernels::neon {
namespace {

constexpr long kMr = 4;
constexpr long kNr = 8;
constexpr long kKc = 256;

inline long min_long(long a, long b) { return a < b ? a : b; }

void micro_kernel(long kc, const float* ap, const float* bp, float alpha,
                  float* c, long ldc, long rows, long cols) {
  float32x4_t acc[kMr][2];
  for (long r = 0; r < kMr; ++r) {
    acc[r][0] = vdupq_n_f32(0.0f);
    acc[r][1] = vdupq_n_f32(0.0f);
  }
  for (long p = 0; p < kc; ++p) {
    const float32x4_t b0 = vld1q_f32(bp + p * kNr);
    const float32x4_t b1 = vld1q_f32(bp + p * kNr + 4);
    const float32x4_t a = vld1q_f32(ap + p * kMr);
    acc[0][0] = vfmaq_laneq_f32(acc[0][0], b0, a, 0);
    acc[0][1] = vfmaq_laneq_f32(acc[0][1], b1, a, 0);
    acc[1][0] = vfmaq_laneq_f32(acc[1][0], b0, a, 1);
    acc[1][1] = vfmaq_laneq_f32(acc[1][1], b1, a, 1);
    acc[2][0] = vfmaq_laneq_f32(acc[2][0], b0, a, 2);
    acc[2][1] = vfmaq_laneq_f32(acc[2][1], b1, a, 2);
    acc[3][0] = vfmaq_laneq_f32(acc[3][0], b0, a, 3);
    acc[3][1] = vfmaq_laneq_f32(acc[3][1], b1, a, 3);
  }
  float tile[kMr][kNr];
  for (long r = 0; r < kMr; ++r) {
    vst1q_f32(tile[r], acc[r][0]);
    vst1q_f32(tile[r] + 4, acc[r][1]);
  }
  for (long r = 0; r < rows; ++r) {
    for (long j = 0; j < cols; ++j) c[r * ldc + j] += alpha * tile[r][j];
  }
}

}  // namespace

void gemm(bool trans_a, bool trans_b, long m, long n, long k, float alpha,
          const float* a, long lda, const float* b, long ldb, float beta,
          float* c, long ldc) {
  if (m <= 0 || n <= 0) return;
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < n; ++j) {
      c[i * ldc + j] = beta == 0.0f ? 0.0f : beta * c[i * ldc + j];
    }
  }
  if (k <= 0 || alpha == 0.0f) return;

  float apack[kKc * kMr];
  float bpack[kKc * kNr];
  for (long pc = 0; pc < k; pc += kKc) {
    const long kc = min_long(kKc, k - pc);
    for (long jr = 0; jr < n; jr += kNr) {
      const long cols = min_long(kNr, n - jr);
      for (long p = 0; p < kc; ++p) {
        for (long j = 0; j < kNr; ++j) {
          const long q = pc + p;
          const long col = jr + j;
          bpack[p * kNr + j] =
              j < cols ? (trans_b ? b[col * ldb + q] : b[q * ldb + col])
                       : 0.0f;
        }
      }
      for (long ir = 0; ir < m; ir += kMr) {
        const long rows = min_long(kMr, m - ir);
        for (long p = 0; p < kc; ++p) {
          for (long r = 0; r < kMr; ++r) {
            const long q = pc + p;
            const long row = ir + r;
            apack[p * kMr + r] =
                r < rows ? (trans_a ? a[q * lda + row] : a[row * lda + q])
                         : 0.0f;
          }
        }
        micro_kernel(kc, apack, bpack, alpha, c + ir * ldc + jr, ldc, rows,
                     cols);
      }
    }
  }
}

float dot(const float* x, const float* y, long n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  long i = 0;
  for (; i + 4 <= n; i += 4) acc = vfmaq_f32(acc, vld1q_f32(x + i), vld1q_f32(y + i));
  float total = vaddvq_f32(acc);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void axpy(long n, float alpha, const float* x, float* y) {
  const float32x4_t va = vdupq_n_f32(alpha);
  long i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void power_spectrum(long n, const float* interleaved, float* out) {
  long i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4x2_t z = vld2q_f32(interleaved + 2 * i);
    vst1q_f32(out + i, vfmaq_f32(vmulq_f32(z.val[0], z.val[0]), z.val[1],
                                 z.val[1]));
  }
  for (; i < n; ++i) {
    const float re = interleaved[2 * i];
    const float im = interleaved[2 * i + 1];
    out[i] = re * re + im * im;
  }
}

void correlate(long n, long taps, const float* w, const float* x, float* y) {
  long i = 0;
  for (; i + 8 <= n; i += 8) {
    float32x4_t acc0 = vld1q_f32(y + i);
    float32x4_t acc1 = vld1q_f32(y + i + 4);
    for (long j = 0; j < taps; ++j) {
      const float32x4_t wj = vdupq_n_f32(w[j]);
      acc0 = vfmaq_f32(acc0, wj, vld1q_f32(x + i + j));
      acc1 = vfmaq_f32(acc1, wj, vld1q_f32(x + i + j + 4));
    }
    vst1q_f32(y + i, acc0);
    vst1q_f32(y + i + 4, acc1);
  }
  for (; i < n; ++i) {
    float acc = 0.0f;
    for (long j = 0; j < taps; ++j) acc += w[j] * x[i + j];
    y[i] += acc;
  }
}

void correlate_grad(long n, long taps, const float* dy, const float* x,
                    float* dw) {
  for (long j0 = 0; j0 < taps; j0 += 4) {
    const long cnt = min_long(4, taps - j0);
    float32x4_t acc[4] = {vdupq_n_f32(0.0f), vdupq_n_f32(0.0f),
                          vdupq_n_f32(0.0f), vdupq_n_f32(0.0f)};
    long i = 0;
    for (; i + 4 <= n; i += 4) {
      const float32x4_t d = vld1q_f32(dy + i);
      for (long j = 0; j < cnt; ++j) {
        acc[j] = vfmaq_f32(acc[j], d, vld1q_f32(x + i + j0 + j));
      }
    }
    for (long j = 0; j < cnt; ++j) {
      float total = vaddvq_f32(acc[j]);
      for (long r = i; r < n; ++r) total += dy[r] * x[r + j0 + j];
      dw[j0 + j] += total;
    }
  }
}

}  // namespace asc::kernels::neon

#endif  // __aarch64__
