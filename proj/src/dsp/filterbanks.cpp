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
#include <complex>
#include <stdexcept>
#include <string>

#include "asc/dsp/spectrogram.hpp"

namespace asc::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Matrix mel_filterbank(std::size_t fft_bins, std::size_t n_mels,
                      int sample_rate) {
  if (sample_rate <= 0) {
    throw std::invalid_argument("mel_filterbank: sample rate must be positive");
  }
  if (n_mels == 0 || fft_bins < 2) {
    throw std::invalid_argument("mel_filterbank: empty bank requested");
  }
  if (n_mels > fft_bins) {
    throw std::invalid_argument("mel_filterbank: " + std::to_string(n_mels) +
                                " filters exceed " + std::to_string(fft_bins) +
                                " FFT bins");
  }
  const std::size_t fft_size = 2 * (fft_bins - 1);
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edge(n_mels + 2);
  for (std::size_t i = 0; i < edge.size(); ++i) {
    edge[i] = mel_to_hz(top * static_cast<double>(i) / (n_mels + 1));
  }
  Matrix bank(n_mels, fft_bins);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edge[m];
    const double centre = edge[m + 1];
    const double hi = edge[m + 2];
    bool any = false;
    for (std::size_t k = 0; k < fft_bins; ++k) {
      const double f = fft_bin_hz(k, fft_size, sample_rate);
      double w = 0.0;
      if (f > lo && f <= centre) {
        w = (f - lo) / (centre - lo);
      } else if (f > centre && f < hi) {
        w = (hi - f) / (hi - centre);
      }
      bank.at(m, k) = static_cast<float>(w);
      any = any || w > 0.0;
    }
    // A filter narrower than the bin spacing can fall between bins; give it
    // the bin nearest its peak so no row is empty.
    if (!any) {
      const auto k = static_cast<std::size_t>(
          std::lround(centre * fft_size / sample_rate));
      bank.at(m, std::min(k, fft_bins - 1)) = 1.0f;
    }
  }
  return bank;
}

double erb_hz(double hz) { return 24.7 * (4.37 * hz / 1000.0 + 1.0); }

double hz_to_erb_rate(double hz) {
  return 21.4 * std::log10(1.0 + 0.00437 * hz);
}

double erb_rate_to_hz(double erb_rate) {
  return (std::pow(10.0, erb_rate / 21.4) - 1.0) / 0.00437;
}

namespace {

double gammatone_magnitude(double hz, double centre, double bandwidth,
                           int order) {
  const std::complex<double> lower(1.0, (hz - centre) / bandwidth);
  const std::complex<double> upper(1.0, (hz + centre) / bandwidth);
  return std::abs(std::pow(lower, -order) + std::pow(upper, -order));
}

}  // namespace

GammatoneFilterbank GammatoneFilterbank::design(std::size_t channels,
                                                std::size_t fft_size,
                                                int sample_rate,
                                                double min_hz) {
  if (channels < 2 || fft_size < 2 || sample_rate <= 0) {
    throw std::invalid_argument("GammatoneFilterbank: invalid geometry");
  }
  const double nyquist = sample_rate / 2.0;
  if (!(min_hz > 0.0 && min_hz < nyquist)) {
    throw std::invalid_argument(
        "GammatoneFilterbank: min frequency must lie in (0, fs/2)");
  }
  GammatoneFilterbank fb;
  const double lo = hz_to_erb_rate(min_hz);
  const double hi = hz_to_erb_rate(nyquist);
  for (std::size_t c = 0; c < channels; ++c) {
    const double rate = lo + (hi - lo) * static_cast<double>(c) / (channels - 1);
    const double centre = c + 1 == channels ? nyquist : erb_rate_to_hz(rate);
    fb.center_hz.push_back(centre);
    fb.bandwidth_hz.push_back(1.019 * erb_hz(centre));
    fb.phase.push_back(0.0);
  }
  const std::size_t bins = fft_size / 2 + 1;
  fb.weights = Matrix(channels, bins);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < bins; ++k) {
      fb.weights.at(c, k) = static_cast<float>(
          fb.response(c, fft_bin_hz(k, fft_size, sample_rate)));
    }
  }
  return fb;
}

double GammatoneFilterbank::response(std::size_t c, double hz) const {
  const double fc = center_hz.at(c);
  const double b = bandwidth_hz.at(c);
  return gammatone_magnitude(hz, fc, b, order) /
         gammatone_magnitude(fc, fc, b, order);
}

}  // namespace asc::dsp
