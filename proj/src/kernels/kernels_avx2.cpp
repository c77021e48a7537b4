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

// AVX2+FMA kernels. The translation unit is compiled for the baseline ISA and
// only the functions tagged ASC_AVX2 use the extended instruction set, so no
// AVX2 code leaks into inline functions shared with other objects.

#include "kernel_decls.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <vector>

#define ASC_AVX2 __attribute__((target("avx2,fma")))

namespace asc::kernels::avx2 {
namespace {

constexpr long kMr = 6;
constexpr long kNr = 16;
constexpr long kKc = 256;
constexpr long kMc = 96;
constexpr long kNc = 2048;

struct PackBuffers {
  std::vector<float> a;
  std::vector<float> b;
};

PackBuffers& pack_buffers() {
  thread_local PackBuffers buffers;
  if (buffers.a.empty()) {
    buffers.a.resize(static_cast<std::size_t>(kMc * kKc));
    buffers.b.resize(static_cast<std::size_t>(kKc * kNc));
  }
  return buffers;
}

// Packs op(A)[i0:i0+mc, p0:p0+kc] into row panels of kMr, zero padded.
void pack_a(bool trans, const float* a, long lda, long i0, long p0, long mc,
            long kc, float* buf) {
  for (long ir = 0; ir < mc; ir += kMr) {
    const long rows = std::min(kMr, mc - ir);
    float* dst = buf + ir * kc;
    for (long p = 0; p < kc; ++p) {
      for (long r = 0; r < kMr; ++r) {
        float v = 0.0f;
        if (r < rows) {
          const long i = i0 + ir + r;
          const long q = p0 + p;
          v = trans ? a[q * lda + i] : a[i * lda + q];
        }
        dst[p * kMr + r] = v;
      }
    }
  }
}

ASC_AVX2 void pack_b(bool trans, const float* b, long ldb, long p0, long j0,
                     long kc, long nc, float* buf) {
  for (long jr = 0; jr < nc; jr += kNr) {
    const long cols = std::min(kNr, nc - jr);
    float* dst = buf + jr * kc;
    if (!trans && cols == kNr) {
      for (long p = 0; p < kc; ++p) {
        const float* src = b + (p0 + p) * ldb + j0 + jr;
        _mm256_storeu_ps(dst + p * kNr, _mm256_loadu_ps(src));
        _mm256_storeu_ps(dst + p * kNr + 8, _mm256_loadu_ps(src + 8));
      }
      continue;
    }
    for (long p = 0; p < kc; ++p) {
      for (long c = 0; c < kNr; ++c) {
        float v = 0.0f;
        if (c < cols) {
          const long q = p0 + p;
          const long j = j0 + jr + c;
          v = trans ? b[j * ldb + q] : b[q * ldb + j];
        }
        dst[p * kNr + c] = v;
      }
    }
  }
}

ASC_AVX2 void micro_kernel(long kc, const float* ap, const float* bp,
                           float alpha, float* c, long ldc, long rows,
                           long cols) {
  __m256 c00 = _mm256_setzero_ps(), c01 = _mm256_setzero_ps();
  __m256 c10 = _mm256_setzero_ps(), c11 = _mm256_setzero_ps();
  __m256 c20 = _mm256_setzero_ps(), c21 = _mm256_setzero_ps();
  __m256 c30 = _mm256_setzero_ps(), c31 = _mm256_setzero_ps();
  __m256 c40 = _mm256_setzero_ps(), c41 = _mm256_setzero_ps();
  __m256 c50 = _mm256_setzero_ps(), c51 = _mm256_setzero_ps();
  for (long p = 0; p < kc; ++p) {
    const __m256 b0 = _mm256_loadu_ps(bp);
    const __m256 b1 = _mm256_loadu_ps(bp + 8);
    __m256 a = _mm256_broadcast_ss(ap);
    c00 = _mm256_fmadd_ps(a, b0, c00);
    c01 = _mm256_fmadd_ps(a, b1, c01);
    a = _mm256_broadcast_ss(ap + 1);
    c10 = _mm256_fmadd_ps(a, b0, c10);
    c11 = _mm256_fmadd_ps(a, b1, c11);
    a = _mm256_broadcast_ss(ap + 2);
    c20 = _mm256_fmadd_ps(a, b0, c20);
    c21 = _mm256_fmadd_ps(a, b1, c21);
    a = _mm256_broadcast_ss(ap + 3);
    c30 = _mm256_fmadd_ps(a, b0, c30);
    c31 = _mm256_fmadd_ps(a, b1, c31);
    a = _mm256_broadcast_ss(ap + 4);
    c40 = _mm256_fmadd_ps(a, b0, c40);
    c41 = _mm256_fmadd_ps(a, b1, c41);
    a = _mm256_broadcast_ss(ap + 5);
    c50 = _mm256_fmadd_ps(a, b0, c50);
    c51 = _mm256_fmadd_ps(a, b1, c51);
    ap += kMr;
    bp += kNr;
  }
  const __m256 acc[kMr][2] = {{c00, c01}, {c10, c11}, {c20, c21},
                              {c30, c31}, {c40, c41}, {c50, c51}};
  const __m256 va = _mm256_set1_ps(alpha);
  if (cols == kNr) {
    for (long r = 0; r < rows; ++r) {
      float* row = c + r * ldc;
      _mm256_storeu_ps(row,
                       _mm256_fmadd_ps(va, acc[r][0], _mm256_loadu_ps(row)));
      _mm256_storeu_ps(
          row + 8, _mm256_fmadd_ps(va, acc[r][1], _mm256_loadu_ps(row + 8)));
    }
    return;
  }
  alignas(32) float tile[kMr][kNr];
  for (long r = 0; r < kMr; ++r) {
    _mm256_store_ps(tile[r], acc[r][0]);
    _mm256_store_ps(tile[r] + 8, acc[r][1]);
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
  if (beta == 0.0f) {
    for (long i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, 0.0f);
  } else if (beta != 1.0f) {
    for (long i = 0; i < m; ++i) {
      for (long j = 0; j < n; ++j) c[i * ldc + j] *= beta;
    }
  }
  if (k <= 0 || alpha == 0.0f) return;

  PackBuffers& buf = pack_buffers();
  for (long jc = 0; jc < n; jc += kNc) {
    const long nc = std::min(kNc, n - jc);
    for (long pc = 0; pc < k; pc += kKc) {
      const long kc = std::min(kKc, k - pc);
      pack_b(trans_b, b, ldb, pc, jc, kc, nc, buf.b.data());
      for (long ic = 0; ic < m; ic += kMc) {
        const long mc = std::min(kMc, m - ic);
        pack_a(trans_a, a, lda, ic, pc, mc, kc, buf.a.data());
        for (long jr = 0; jr < nc; jr += kNr) {
          const long cols = std::min(kNr, nc - jr);
          for (long ir = 0; ir < mc; ir += kMr) {
            const long rows = std::min(kMr, mc - ir);
            micro_kernel(kc, buf.a.data() + ir * kc, buf.b.data() + jr * kc,
                         alpha, c + (ic + ir) * ldc + jc + jr, ldc, rows,
                         cols);
          }
        }
      }
    }
  }
}

ASC_AVX2 float dot(const float* x, const float* y, long n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  long i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i),
                           acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8),
                           _mm256_loadu_ps(y + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i),
                           acc0);
  }
  acc0 = _mm256_add_ps(acc0, acc1);
  __m128 lo = _mm_add_ps(_mm256_castps256_ps128(acc0),
                         _mm256_extractf128_ps(acc0, 1));
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  float total = _mm_cvtss_f32(lo);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

ASC_AVX2 void axpy(long n, float alpha, const float* x, float* y) {
  const __m256 va = _mm256_set1_ps(alpha);
  long i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

ASC_AVX2 void power_spectrum(long n, const float* interleaved, float* out) {
  long i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v0 = _mm256_loadu_ps(interleaved + 2 * i);
    const __m256 v1 = _mm256_loadu_ps(interleaved + 2 * i + 8);
    const __m256 s = _mm256_hadd_ps(_mm256_mul_ps(v0, v0),
                                    _mm256_mul_ps(v1, v1));
    // hadd works per 128-bit lane: restore element order.
    const __m256d ordered =
        _mm256_permute4x64_pd(_mm256_castps_pd(s), 0xD8);
    _mm256_storeu_ps(out + i, _mm256_castpd_ps(ordered));
  }
  for (; i < n; ++i) {
    const float re = interleaved[2 * i];
    const float im = interleaved[2 * i + 1];
    out[i] = re * re + im * im;
  }
}

ASC_AVX2 void correlate(long n, long taps, const float* w, const float* x,
                        float* y) {
  long i = 0;
  for (; i + 16 <= n; i += 16) {
    __m256 acc0 = _mm256_loadu_ps(y + i);
    __m256 acc1 = _mm256_loadu_ps(y + i + 8);
    for (long j = 0; j < taps; ++j) {
      const __m256 wj = _mm256_broadcast_ss(w + j);
      acc0 = _mm256_fmadd_ps(wj, _mm256_loadu_ps(x + i + j), acc0);
      acc1 = _mm256_fmadd_ps(wj, _mm256_loadu_ps(x + i + j + 8), acc1);
    }
    _mm256_storeu_ps(y + i, acc0);
    _mm256_storeu_ps(y + i + 8, acc1);
  }
  for (; i + 8 <= n; i += 8) {
    __m256 acc = _mm256_loadu_ps(y + i);
    for (long j = 0; j < taps; ++j) {
      acc = _mm256_fmadd_ps(_mm256_broadcast_ss(w + j),
                            _mm256_loadu_ps(x + i + j), acc);
    }
    _mm256_storeu_ps(y + i, acc);
  }
  for (; i < n; ++i) {
    float acc = 0.0f;
    for (long j = 0; j < taps; ++j) acc += w[j] * x[i + j];
    y[i] += acc;
  }
}

namespace {

ASC_AVX2 inline float hsum(__m256 v) {
  __m128 lo = _mm_add_ps(_mm256_castps256_ps128(v),
                         _mm256_extractf128_ps(v, 1));
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

// Up to 8 taps at a time, one vector accumulator per tap.
template <int kTaps>
ASC_AVX2 void correlate_grad_block(long n, const float* dy, const float* x,
                                   float* dw) {
  __m256 acc[kTaps];
  for (int j = 0; j < kTaps; ++j) acc[j] = _mm256_setzero_ps();
  long i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_loadu_ps(dy + i);
    for (int j = 0; j < kTaps; ++j) {
      acc[j] = _mm256_fmadd_ps(d, _mm256_loadu_ps(x + i + j), acc[j]);
    }
  }
  for (int j = 0; j < kTaps; ++j) {
    float total = hsum(acc[j]);
    for (long r = i; r < n; ++r) total += dy[r] * x[r + j];
    dw[j] += total;
  }
}

}  // namespace

ASC_AVX2 void correlate_grad(long n, long taps, const float* dy,
                             const float* x, float* dw) {
  for (long j0 = 0; j0 < taps; j0 += 8) {
    const float* xs = x + j0;
    float* out = dw + j0;
    switch (std::min<long>(8, taps - j0)) {
      case 1: correlate_grad_block<1>(n, dy, xs, out); break;
      case 2: correlate_grad_block<2>(n, dy, xs, out); break;
      case 3: correlate_grad_block<3>(n, dy, xs, out); break;
      case 4: correlate_grad_block<4>(n, dy, xs, out); break;
      case 5: correlate_grad_block<5>(n, dy, xs, out); break;
      case 6: correlate_grad_block<6>(n, dy, xs, out); break;
      case 7: correlate_grad_block<7>(n, dy, xs, out); break;
      default: correlate_grad_block<8>(n, dy, xs, out); break;
    }
  }
}

}  // namespace asc::kernels::avx2

#endif  // x86-64
