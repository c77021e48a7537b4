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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "asc/dsp/spectrogram.hpp"
#include "cqt_kernels.hpp"
#include "fft.hpp"

namespace asc::dsp {

CqtGeometry CqtGeometry::design(std::size_t bins, std::size_t bins_per_octave,
                                int sample_rate) {
  if (bins == 0 || bins_per_octave == 0 || sample_rate <= 0) {
    throw std::invalid_argument("CqtGeometry: invalid geometry");
  }
  CqtGeometry g;
  g.bins = bins;
  g.bins_per_octave = bins_per_octave;
  const double octaves =
      static_cast<double>(bins) / static_cast<double>(bins_per_octave);
  g.f_min = sample_rate / 2.0 / std::pow(2.0, octaves);
  g.q = 1.0 / (std::pow(2.0, 1.0 / bins_per_octave) - 1.0);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = g.f_min * std::pow(2.0, static_cast<double>(k) /
                                                 bins_per_octave);
    g.center_hz.push_back(f);
    g.kernel_length.push_back(
        static_cast<std::size_t>(std::ceil(g.q * sample_rate / f)));
  }
  return g;
}

std::vector<std::complex<double>> cqt_time_kernel(const CqtGeometry& geometry,
                                                  std::size_t k,
                                                  int sample_rate) {
  const std::size_t len = geometry.kernel_length.at(k);
  const double f = geometry.center_hz.at(k);
  const double half = static_cast<double>(len / 2);
  std::vector<std::complex<double>> kernel(len);
  for (std::size_t n = 0; n < len; ++n) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / static_cast<double>(len));
    const double phase = -2.0 * std::numbers::pi * f * (n - half) / sample_rate;
    kernel[n] = std::polar(hann / static_cast<double>(len), phase);
  }
  return kernel;
}

CqtKernels CqtKernels::design(const CqtGeometry& geometry, int sample_rate,
                              double sparsity) {
  CqtKernels out;
  out.geometry = geometry;
  const std::size_t longest = *std::max_element(geometry.kernel_length.begin(),
                                                geometry.kernel_length.end());
  const std::size_t L = next_power_of_two(longest);
  out.fft_size = L;
  out.offset.push_back(0);
  ComplexFft fft(L);
  std::vector<float> magnitude(L);
  for (std::size_t k = 0; k < geometry.bins; ++k) {
    const auto kernel = cqt_time_kernel(geometry, k, sample_rate);
    float* in = fft.input();
    std::fill(in, in + 2 * L, 0.0f);
    const std::size_t start = L / 2 - kernel.size() / 2;
    // S[j] = (1/L) sum_m a[m] e^{+i 2 pi j m / L} = conj(FFT(conj(a)))[j] / L
    for (std::size_t n = 0; n < kernel.size(); ++n) {
      in[2 * (start + n)] = static_cast<float>(kernel[n].real());
      in[2 * (start + n) + 1] = static_cast<float>(-kernel[n].imag());
    }
    fft.execute();
    const float* spec = fft.output();
    float peak = 0.0f;
    for (std::size_t j = 0; j < L; ++j) {
      magnitude[j] = std::hypot(spec[2 * j], spec[2 * j + 1]);
      peak = std::max(peak, magnitude[j]);
    }
    const float cut = static_cast<float>(sparsity) * peak;
    const float scale = 1.0f / static_cast<float>(L);
    for (std::size_t j = 0; j < L; ++j) {
      if (magnitude[j] < cut || magnitude[j] == 0.0f) continue;
      out.index.push_back(j);
      out.weight.emplace_back(spec[2 * j] * scale, -spec[2 * j + 1] * scale);
    }
    out.offset.push_back(out.index.size());
  }
  return out;
}

}  // namespace asc::dsp
