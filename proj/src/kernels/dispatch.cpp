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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "asc/kernels/kernels.hpp"
#include "kernel_decls.hpp"

namespace asc::kernels {
namespace {

struct KernelTable {
  decltype(&scalar::gemm) gemm;
  decltype(&scalar::dot) dot;
  decltype(&scalar::axpy) axpy;
  decltype(&scalar::power_spectrum) power_spectrum;
  decltype(&scalar::correlate) correlate;
  decltype(&scalar::correlate_grad) correlate_grad;
};

constexpr KernelTable kScalarTable{scalar::gemm, scalar::dot, scalar::axpy,
                                   scalar::power_spectrum,
                                   scalar::correlate, scalar::correlate_grad};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2Table{avx2::gemm, avx2::dot, avx2::axpy,
                                 avx2::power_spectrum,
                                 avx2::correlate, avx2::correlate_grad};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeonTable{neon::gemm, neon::dot, neon::axpy,
                                 neon::power_spectrum,
                                 neon::correlate, neon::correlate_grad};
#endif

const KernelTable* table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2:
      return &kAvx2Table;
#endif
#if defined(__aarch64__)
    case Isa::kNeon:
      return &kNeonTable;
#endif
    default:
      return &kScalarTable;
  }
}

Isa initial_isa() {
  Isa isa = detected_isa();
  if (const char* env = std::getenv("ASC_SIMD")) {
    const std::string want(env);
    if (want == "scalar") {
      isa = Isa::kScalar;
    } else if (want == "avx2" && isa_supported(Isa::kAvx2)) {
      isa = Isa::kAvx2;
    } else if (want == "neon" && isa_supported(Isa::kNeon)) {
      isa = Isa::kNeon;
    }
  }
  return isa;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const KernelTable& table() { return *table_for(active().load()); }

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_supported(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() { return active().load(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("SIMD variant not supported on this CPU: " +
                                std::string(isa_name(isa)));
  }
  active().store(isa);
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, float alpha, const float* a, std::size_t lda,
          const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc) {
  table().gemm(trans_a, trans_b, static_cast<long>(m), static_cast<long>(n),
               static_cast<long>(k), alpha, a, static_cast<long>(lda), b,
               static_cast<long>(ldb), beta, c, static_cast<long>(ldc));
}

float dot(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  return table().dot(x.data(), y.data(), static_cast<long>(x.size()));
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  table().axpy(static_cast<long>(x.size()), alpha, x.data(), y.data());
}

void power_spectrum(std::span<const float> interleaved, std::span<float> out) {
  if (interleaved.size() != 2 * out.size()) {
    throw std::invalid_argument("power_spectrum: size mismatch");
  }
  table().power_spectrum(static_cast<long>(out.size()), interleaved.data(),
                         out.data());
}

void correlate(std::span<const float> w, std::span<const float> x,
               std::span<float> y) {
  if (w.empty() || x.size() + 1 != y.size() + w.size()) {
    throw std::invalid_argument("correlate: size mismatch");
  }
  table().correlate(static_cast<long>(y.size()), static_cast<long>(w.size()),
                    w.data(), x.data(), y.data());
}

void correlate_grad(std::span<const float> dy, std::span<const float> x,
                    std::span<float> dw) {
  if (dw.empty() || x.size() + 1 != dy.size() + dw.size()) {
    throw std::invalid_argument("correlate_grad: size mismatch");
  }
  table().correlate_grad(static_cast<long>(dy.size()),
                         static_cast<long>(dw.size()), dy.data(), x.data(),
                         dw.data());
}

}  // namespace asc::kernels
