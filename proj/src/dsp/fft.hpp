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

// Thin RAII wrapper over a single-precision FFTW real-to-complex plan.

#ifndef ASC_SRC_DSP_FFT_HPP_
#define ASC_SRC_DSP_FFT_HPP_

#include <fftw3.h>

#include <cstddef>

namespace asc::dsp {

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  // n real inputs.
  float* input() { return in_; }
  // n / 2 + 1 interleaved complex outputs.
  const float* output() const { return reinterpret_cast<const float*>(out_); }
  void execute();

 private:
  std::size_t n_;
  float* in_ = nullptr;
  fftwf_complex* out_ = nullptr;
  fftwf_plan plan_ = nullptr;
};

// Forward complex transform, interleaved input and output of n values.
class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  float* input() { return reinterpret_cast<float*>(in_); }
  const float* output() const { return reinterpret_cast<const float*>(out_); }
  void execute();

 private:
  std::size_t n_;
  fftwf_complex* in_ = nullptr;
  fftwf_complex* out_ = nullptr;
  fftwf_plan plan_ = nullptr;
};

std::size_t next_power_of_two(std::size_t n);

}  // namespace asc::dsp

#endif  // ASC_SRC_DSP_FFT_HPP_
