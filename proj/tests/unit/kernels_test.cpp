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

#include "asc/kernels/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace asc::kernels {
namespace {

std::vector<float> random_vector(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

// Runs `body` once per SIMD variant available on this machine.
template <typename Body>
void for_each_isa(Body&& body) {
  const Isa saved = active_isa();
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (!isa_supported(isa)) continue;
    set_isa(isa);
    SCOPED_TRACE(std::string(isa_name(isa)));
    body(isa);
  }
  set_isa(saved);
}

TEST(KernelsTest, GemmMatchesReferenceForAllTransposes) {
  std::mt19937 rng(7);
  // Sizes straddle the micro-tile and cache-block edges.
  const std::size_t sizes[][3] = {{1, 1, 1},    {5, 7, 3},     {6, 16, 9},
                                  {13, 33, 70}, {97, 18, 300}, {4, 2100, 81}};
  for_each_isa([&](Isa) {
    for (const auto& s : sizes) {
      const std::size_t m = s[0], n = s[1], k = s[2];
      for (bool ta : {false, true}) {
        for (bool tb : {false, true}) {
          const auto a = random_vector(m * k, rng);
          const auto b = random_vector(k * n, rng);
          auto c = random_vector(m * n, rng);
          const std::size_t lda = ta ? m : k;
          const std::size_t ldb = tb ? k : n;
          std::vector<double> ref(c.begin(), c.end());
          std::vector<double> ad(a.begin(), a.end());
          std::vector<double> bd(b.begin(), b.end());
          gemm_ref<double>(ta, tb, m, n, k, 0.5, ad.data(), lda, bd.data(), ldb,
                           2.0, ref.data(), n);
          gemm(ta, tb, m, n, k, 0.5f, a.data(), lda, b.data(), ldb, 2.0f,
               c.data(), n);
          for (std::size_t i = 0; i < m * n; ++i) {
            ASSERT_NEAR(c[i], ref[i], 1e-4 * (1.0 + std::sqrt(double(k))))
                << "m=" << m << " n=" << n << " k=" << k << " ta=" << ta
                << " tb=" << tb;
          }
        }
      }
    }
  });
}

TEST(KernelsTest, GemmWithZeroBetaIgnoresGarbageInOutput) {
  for_each_isa([](Isa) {
    const std::vector<float> a = {1, 2, 3, 4};
    const std::vector<float> b = {1, 0, 0, 1};
    std::vector<float> c(4, std::nanf(""));
    gemm(false, false, 2, 2, 2, 1.0f, a.data(), 2, b.data(), 2, 0.0f,
         c.data(), 2);
    EXPECT_EQ(c, a);
  });
}

TEST(KernelsTest, DotAxpyPowerMatchScalar) {
  std::mt19937 rng(11);
  for (std::size_t n : {0u, 1u, 7u, 8u, 17u, 1000u}) {
    const auto x = random_vector(n, rng);
    const auto y = random_vector(n, rng);
    const auto z = random_vector(2 * n, rng);
    double ref_dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref_dot += double(x[i]) * y[i];
    for_each_isa([&](Isa) {
      EXPECT_NEAR(dot(x, y), ref_dot, 1e-4 * (1.0 + n / 100.0));

      auto acc = y;
      axpy(0.25f, x, acc);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_FLOAT_EQ(acc[i], y[i] + 0.25f * x[i]);
      }

      std::vector<float> power(n);
      power_spectrum(z, power);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(power[i], z[2 * i] * z[2 * i] + z[2 * i + 1] * z[2 * i + 1],
                    1e-6);
      }
    });
  }
}

TEST(KernelsTest, CorrelateMatchesReference) {
  std::mt19937 rng(12);
  for (std::size_t taps : {1u, 3u, 5u, 8u, 9u, 13u}) {
    for (std::size_t n : {1u, 7u, 16u, 31u, 128u}) {
      const auto w = random_vector(taps, rng);
      const auto x = random_vector(n + taps - 1, rng);
      const auto y0 = random_vector(n, rng);
      std::vector<double> ref_y(n), ref_dw(taps);
      for (std::size_t i = 0; i < n; ++i) {
        ref_y[i] = y0[i];
        for (std::size_t j = 0; j < taps; ++j) {
          ref_y[i] += double(w[j]) * x[i + j];
          ref_dw[j] += double(y0[i]) * x[i + j];
        }
      }
      for_each_isa([&](Isa) {
        auto y = y0;
        correlate(w, x, y);
        std::vector<float> dw(taps, 0.0f);
        correlate_grad(y0, x, dw);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], ref_y[i], 1e-5);
        for (std::size_t j = 0; j < taps; ++j) {
          EXPECT_NEAR(dw[j], ref_dw[j], 1e-5 * (1.0 + n / 10.0));
        }
      });
    }
  }
}

TEST(KernelsTest, SizeMismatchIsRejected) {
  std::vector<float> x(3), y(4);
  EXPECT_THROW(dot(x, y), std::invalid_argument);
  EXPECT_THROW(axpy(1.0f, x, y), std::invalid_argument);
  EXPECT_THROW(power_spectrum(x, y), std::invalid_argument);
  std::vector<float> w(2);
  EXPECT_THROW(correlate(w, x, y), std::invalid_argument);
  EXPECT_THROW(correlate_grad(y, x, w), std::invalid_argument);
}

TEST(KernelsTest, UnsupportedIsaCannotBeForced) {
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (!isa_supported(isa)) {
      EXPECT_THROW(set_isa(isa), std::invalid_argument);
    }
  }
  EXPECT_TRUE(isa_supported(Isa::kScalar));
  EXPECT_TRUE(isa_supported(detected_isa()));
}

}  // namespace
}  // namespace asc::kernels
