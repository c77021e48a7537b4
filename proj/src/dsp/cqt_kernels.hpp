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

// Sparse spectral kernels for the constant-Q transform. Bin k's time
// kernel is a Hann window of N_k samples modulated to f_k and scaled by
// 1 / N_k, centred in an L-point frame. Its spectrum S_k is precomputed so
// that for a frame x of L samples
//
//   X_k = sum_m x[m] a_k[m] = sum_j FFT(x)[j] * S_k[j],
//
// keeping entries above a relative threshold. Indices run over [0, L); for
// a real frame FFT(x)[j] = conj(FFT(x)[L - j]) above L / 2.

#ifndef ASC_SRC_DSP_CQT_KERNELS_HPP_
#define ASC_SRC_DSP_CQT_KERNELS_HPP_

#include <complex>
#include <cstddef>
#include <vector>

#include "asc/dsp/spectrogram.hpp"

namespace asc::dsp {

struct CqtKernels {
  CqtGeometry geometry;
  std::size_t fft_size = 0;  // L
  // CSR over bins: entries [offset[k], offset[k + 1]).
  std::vector<std::size_t> offset;
  std::vector<std::size_t> index;
  std::vector<std::complex<float>> weight;

  static CqtKernels design(const CqtGeometry& geometry, int sample_rate,
                           double sparsity);
};

// Complex time-domain kernel of bin k: N_k samples, sample n sits at time
// offset n - N_k / 2 from the frame centre.
std::vector<std::complex<double>> cqt_time_kernel(const CqtGeometry& geometry,
                                                  std::size_t k,
                                                  int sample_rate);

}  // namespace asc::dsp

#endif  // ASC_SRC_DSP_CQT_KERNELS_HPP_
