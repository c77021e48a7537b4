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
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include "asc/dsp/spectrogram.hpp"
#include "asc/kernels/kernels.hpp"
#include "cqt_kernels.hpp"
#include "fft.hpp"

namespace asc::dsp {
namespace {

// Filterbanks depend only on geometry, so they are built once per
// (kind, rate, size, ...) and shared read-only between threads.
template <typename Key, typename Value, typename Build>
std::shared_ptr<const Value> cached(const Key& key, Build&& build) {
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const Value>> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto value = std::make_shared<const Value>(build());
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(value)).first->second;
}

std::shared_ptr<const Matrix> mel_bank(std::size_t fft_size,
                                       std::size_t n_mels, int rate) {
  return cached<std::tuple<std::size_t, std::size_t, int>, Matrix>(
      {fft_size, n_mels, rate},
      [&] { return mel_filterbank(fft_size / 2 + 1, n_mels, rate); });
}

std::shared_ptr<const GammatoneFilterbank> gamma_bank(std::size_t fft_size,
                                                      std::size_t channels,
                                                      int rate,
                                                      double min_hz) {
  return cached<std::tuple<std::size_t, std::size_t, int, double>,
                GammatoneFilterbank>(
      {fft_size, channels, rate, min_hz}, [&] {
        return GammatoneFilterbank::design(channels, fft_size, rate, min_hz);
      });
}

std::shared_ptr<const CqtKernels> cqt_kernels(const SpectrogramConfig& cfg,
                                              int rate) {
  return cached<std::tuple<std::size_t, std::size_t, int, double>, CqtKernels>(
      {cfg.n_filters, cfg.cqt_bins_per_octave, rate, cfg.cqt_sparsity}, [&] {
        return CqtKernels::design(
            CqtGeometry::design(cfg.n_filters, cfg.cqt_bins_per_octave, rate),
            rate, cfg.cqt_sparsity);
      });
}

Spectrogram empty_like(const AudioSegment& audio, const SpectrogramConfig& cfg,
                       SpectrogramKind kind) {
  Spectrogram s;
  s.kind = kind;
  s.config = cfg;
  s.config.kind = kind;
  s.segment_id = audio.source_id;
  s.sample_rate = audio.sample_rate;
  s.device_id = audio.device_id;
  s.label = audio.label;
  return s;
}

// values = log(power * bank^T + floor)
Matrix apply_bank(const Matrix& power, const Matrix& bank, double log_floor) {
  Matrix out(power.rows, bank.rows);
  kernels::gemm(false, true, power.rows, bank.rows, power.cols, 1.0f,
                power.data.data(), power.cols, bank.data.data(), bank.cols,
                0.0f, out.data.data(), out.cols);
  for (float& v : out.data) {
    v = static_cast<float>(std::log(std::max(0.0f, v) + log_floor));
  }
  return out;
}

void require_kind(const SpectrogramConfig& cfg, SpectrogramKind kind) {
  if (cfg.kind != kind) {
    throw std::invalid_argument("spectrogram config kind is " +
                                std::string(to_string(cfg.kind)) +
                                ", expected " + std::string(to_string(kind)));
  }
}

}  // namespace

Spectrogram log_mel_spectrogram(const AudioSegment& audio,
                                const SpectrogramConfig& cfg) {
  require_kind(cfg, SpectrogramKind::kLogMel);
  const Matrix power = power_stft(audio, cfg);
  const std::size_t fft_size = 2 * (power.cols - 1);
  Spectrogram s = empty_like(audio, cfg, SpectrogramKind::kLogMel);
  s.values = apply_bank(power, *mel_bank(fft_size, cfg.n_filters,
                                         audio.sample_rate),
                        cfg.log_floor);
  return s;
}

Spectrogram gammatone_spectrogram(const AudioSegment& audio,
                                  const SpectrogramConfig& cfg) {
  require_kind(cfg, SpectrogramKind::kGamma);
  const Matrix power = power_stft(audio, cfg);
  const std::size_t fft_size = 2 * (power.cols - 1);
  Spectrogram s = empty_like(audio, cfg, SpectrogramKind::kGamma);
  s.values = apply_bank(
      power,
      gamma_bank(fft_size, cfg.n_filters, audio.sample_rate, cfg.gamma_min_hz)
          ->weights,
      cfg.log_floor);
  return s;
}

Spectrogram cqt_spectrogram(const AudioSegment& audio,
                            const SpectrogramConfig& cfg) {
  require_kind(cfg, SpectrogramKind::kCqt);
  audio.validate();
  const FrameGeometry g =
      frame_geometry(audio.samples.size(), audio.sample_rate, cfg);
  const auto kernels = cqt_kernels(cfg, audio.sample_rate);
  const std::size_t longest = kernels->geometry.kernel_length.front();
  if (longest > audio.samples.size()) {
    throw std::invalid_argument(
        "CQT lowest bin (" + std::to_string(kernels->geometry.f_min) +
        " Hz) needs " + std::to_string(longest) + " samples, audio '" +
        audio.source_id + "' has " + std::to_string(audio.samples.size()));
  }
  const std::size_t L = kernels->fft_size;
  const long n = static_cast<long>(audio.samples.size());
  RealFft fft(L);
  Spectrogram s = empty_like(audio, cfg, SpectrogramKind::kCqt);
  s.values = Matrix(g.frames, cfg.n_filters);
  const auto* spec = reinterpret_cast<const std::complex<float>*>(fft.output());
  for (std::size_t t = 0; t < g.frames; ++t) {
    const long centre = static_cast<long>(t * g.hop + g.window / 2);
    const long first = centre - static_cast<long>(L / 2);
    float* in = fft.input();
    for (std::size_t m = 0; m < L; ++m) {
      const long idx = first + static_cast<long>(m);
      in[m] = idx >= 0 && idx < n ? audio.samples[idx] : 0.0f;
    }
    fft.execute();
    float* row = s.values.row(t);
    for (std::size_t k = 0; k < cfg.n_filters; ++k) {
      std::complex<float> acc(0.0f, 0.0f);
      for (std::size_t e = kernels->offset[k]; e < kernels->offset[k + 1]; ++e) {
        const std::size_t j = kernels->index[e];
        const std::complex<float> x =
            j <= L / 2 ? spec[j] : std::conj(spec[L - j]);
        acc += x * kernels->weight[e];
      }
      row[k] = static_cast<float>(std::log(std::norm(acc) + cfg.log_floor));
    }
  }
  return s;
}

Spectrogram compute_spectrogram(const AudioSegment& audio,
                                const SpectrogramConfig& cfg) {
  switch (cfg.kind) {
    case SpectrogramKind::kLogMel:
      return log_mel_spectrogram(audio, cfg);
    case SpectrogramKind::kGamma:
      return gammatone_spectrogram(audio, cfg);
    case SpectrogramKind::kCqt:
      return cqt_spectrogram(audio, cfg);
  }
  throw std::invalid_argument("unknown spectrogram kind");
}

std::size_t min_samples_for_all_kinds(int sample_rate,
                                      const SpectrogramConfig& cfg) {
  cfg.validate();
  const CqtGeometry g =
      CqtGeometry::design(cfg.n_filters, cfg.cqt_bins_per_octave, sample_rate);
  return std::max(cfg.window_samples(sample_rate), g.kernel_length.front());
}

}  // namespace asc::dsp
