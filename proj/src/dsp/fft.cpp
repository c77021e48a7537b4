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

#include "fft.hpp"

#include <mutex>
#include <new>
#include <stdexcept>

namespace asc::dsp {
namespace {

// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("RealFft: size must be >= 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  in_ = fftwf_alloc_real(n);
  out_ = fftwf_alloc_complex(n / 2 + 1);
  if (in_ == nullptr || out_ == nullptr) {
    fftwf_free(in_);
    fftwf_free(out_);
    throw std::bad_alloc();
  }
  plan_ = fftwf_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  if (plan_ == nullptr) {
    fftwf_free(in_);
    fftwf_free(out_);
    throw std::runtime_error("RealFft: FFTW planning failed");
  }
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftwf_destroy_plan(plan_);
  fftwf_free(in_);
  fftwf_free(out_);
}

void RealFft::execute() { fftwf_execute(plan_); }

ComplexFft::ComplexFft(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("ComplexFft: size must be >= 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  in_ = fftwf_alloc_complex(n);
  out_ = fftwf_alloc_complex(n);
  if (in_ == nullptr || out_ == nullptr) {
    fftwf_free(in_);
    fftwf_free(out_);
    throw std::bad_alloc();
  }
  plan_ = fftwf_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_FORWARD,
                            FFTW_ESTIMATE);
  if (plan_ == nullptr) {
    fftwf_free(in_);
    fftwf_free(out_);
    throw std::runtime_error("ComplexFft: FFTW planning failed");
  }
}

ComplexFft::~ComplexFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftwf_destroy_plan(plan_);
  fftwf_free(in_);
  fftwf_free(out_);
}

void ComplexFft::execute() { fftwf_execute(plan_); }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace asc::dsp
