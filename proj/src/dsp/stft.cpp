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
#include <cctype>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "asc/dsp/spectrogram.hpp"
#include "asc/kernels/kernels.hpp"
#include "fft.hpp"

namespace asc::dsp {

std::string_view to_string(SpectrogramKind kind) {
  switch (kind) {
    case SpectrogramKind::kLogMel:
      return "logmel";
    case SpectrogramKind::kGamma:
      return "gamma";
    case SpectrogramKind::kCqt:
      return "cqt";
  }
  return "unknown";
}

SpectrogramKind spectrogram_kind_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (SpectrogramKind k : kAllKinds) {
    if (to_string(k) == lower) return k;
  }
  throw std::invalid_argument("unknown spectrogram kind: " + std::string(name));
}

void SpectrogramConfig::validate() const {
  if (!(hop_ms > 0.0) || !(window_ms >= hop_ms)) {
    throw std::invalid_argument(
        "SpectrogramConfig: need window_ms >= hop_ms > 0");
  }
  if (n_filters == 0) {
    throw std::invalid_argument("SpectrogramConfig: n_filters must be > 0");
  }
  if (!(log_floor > 0.0)) {
    throw std::invalid_argument("SpectrogramConfig: log_floor must be > 0");
  }
  if (!(gamma_min_hz > 0.0)) {
    throw std::invalid_argument("SpectrogramConfig: gamma_min_hz must be > 0");
  }
  if (cqt_bins_per_octave == 0) {
    throw std::invalid_argument(
        "SpectrogramConfig: cqt_bins_per_octave must be > 0");
  }
  if (!(cqt_sparsity >= 0.0 && cqt_sparsity < 1.0)) {
    throw std::invalid_argument(
        "SpectrogramConfig: cqt_sparsity must be in [0, 1)");
  }
}

std::size_t SpectrogramConfig::window_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(window_ms * sample_rate / 1000.0));
}

std::size_t SpectrogramConfig::hop_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(hop_ms * sample_rate / 1000.0));
}

FrameGeometry frame_geometry(std::size_t n_samples, int sample_rate,
                             const SpectrogramConfig& cfg) {
  cfg.validate();
  if (sample_rate <= 0) {
    throw std::invalid_argument("sample rate must be positive");
  }
  FrameGeometry g;
  g.window = cfg.window_samples(sample_rate);
  g.hop = cfg.hop_samples(sample_rate);
  if (g.window < 2 || g.hop == 0) {
    throw std::invalid_argument("window/hop round to too few samples at " +
                                std::to_string(sample_rate) + " Hz");
  }
  if (n_samples < g.window) {
    throw std::invalid_argument(
        "audio too short: " + std::to_string(n_samples) +
        " samples, one window needs " + std::to_string(g.window));
  }
  g.fft_size = next_power_of_two(g.window);
  g.bins = g.fft_size / 2 + 1;
  g.frames = 1 + (n_samples - g.window) / g.hop;
  return g;
}

double fft_bin_hz(std::size_t k, std::size_t fft_size, int sample_rate) {
  return static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
}

Matrix power_stft(const AudioSegment& audio, const SpectrogramConfig& cfg) {
  audio.validate();
  const FrameGeometry g =
      frame_geometry(audio.samples.size(), audio.sample_rate, cfg);
  std::vector<float> window(g.window);
  for (std::size_t n = 0; n < g.window; ++n) {
    window[n] = static_cast<float>(
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (g.window - 1)));
  }
  RealFft fft(g.fft_size);
  Matrix power(g.frames, g.bins);
  float* in = fft.input();
  std::fill(in, in + g.fft_size, 0.0f);
  for (std::size_t t = 0; t < g.frames; ++t) {
    const float* x = audio.samples.data() + t * g.hop;
    for (std::size_t n = 0; n < g.window; ++n) in[n] = x[n] * window[n];
    fft.execute();
    kernels::power_spectrum(std::span<const float>(fft.output(), 2 * g.bins),
                            std::span<float>(power.row(t), g.bins));
  }
  return power;
}

Matrix stft(const AudioSegment& audio, const SpectrogramConfig& cfg) {
  Matrix m = power_stft(audio, cfg);
  for (float& v : m.data) v = std::sqrt(v);
  return m;
}

}  // namespace asc::dsp
