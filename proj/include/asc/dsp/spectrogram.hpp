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

// Time-frequency front ends. All three spectrogram kinds share the STFT
// framing (Hamming window of window_ms, hop of hop_ms, frame t starting at
// sample t * hop) so they produce the same number of frames on the same
// audio:
//
//   frames = 1 + floor((len - N) / hop),  N = round(window_ms * fs / 1000)
//
// Values are log(filtered power + log_floor).

#ifndef ASC_DSP_SPECTROGRAM_HPP_
#define ASC_DSP_SPECTROGRAM_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asc/dsp/audio.hpp"

namespace asc::dsp {

enum class SpectrogramKind { kLogMel, kGamma, kCqt };

inline constexpr std::array<SpectrogramKind, 3> kAllKinds = {
    SpectrogramKind::kLogMel, SpectrogramKind::kGamma, SpectrogramKind::kCqt};

std::string_view to_string(SpectrogramKind kind);
// Accepts "logmel", "gamma", "cqt" (case-insensitive).
SpectrogramKind spectrogram_kind_from_string(std::string_view name);

struct SpectrogramConfig {
  double window_ms = 43.0;
  double hop_ms = 6.0;
  std::size_t n_filters = 128;
  SpectrogramKind kind = SpectrogramKind::kLogMel;
  double log_floor = 1e-10;
  bool normalize = false;

  double gamma_min_hz = 50.0;
  std::size_t cqt_bins_per_octave = 16;
  // Kernel spectrum entries below this fraction of a bin's peak are dropped.
  double cqt_sparsity = 1e-3;

  void validate() const;
  std::size_t window_samples(int sample_rate) const;
  std::size_t hop_samples(int sample_rate) const;
};

// Row-major rows x cols float matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  const float* row(std::size_t r) const { return data.data() + r * cols; }
  float* row(std::size_t r) { return data.data() + r * cols; }
};

struct FrameGeometry {
  std::size_t window = 0;    // N
  std::size_t hop = 0;
  std::size_t fft_size = 0;  // next power of two >= N
  std::size_t bins = 0;      // fft_size / 2 + 1
  std::size_t frames = 0;
};

// Throws std::invalid_argument("audio too short ...") when fewer than N
// samples are available.
FrameGeometry frame_geometry(std::size_t n_samples, int sample_rate,
                             const SpectrogramConfig& cfg);

// Centre frequency in Hz of FFT bin k.
double fft_bin_hz(std::size_t k, std::size_t fft_size, int sample_rate);

// |X_t(k)| of the Hamming-windowed, zero-padded frames: frames x bins.
Matrix stft(const AudioSegment& audio, const SpectrogramConfig& cfg);
// |X_t(k)|^2, same layout.
Matrix power_stft(const AudioSegment& audio, const SpectrogramConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mels x fft_bins triangular filters, peaks equally spaced in mel between
// 0 Hz and fs / 2 (n_mels + 2 edge points). Unnormalized: each filter peaks
// at 1. Throws if n_mels exceeds fft_bins.
Matrix mel_filterbank(std::size_t fft_bins, std::size_t n_mels,
                      int sample_rate);

double erb_hz(double hz);
double hz_to_erb_rate(double hz);
double erb_rate_to_hz(double erb_rate);

// Fourth-order gammatone channels sampled in the frequency domain.
struct GammatoneFilterbank {
  int order = 4;
  std::vector<double> center_hz;     // strictly increasing
  std::vector<double> bandwidth_hz;  // 1.019 * ERB(centre)
  std::vector<double> phase;         // all zero
  Matrix weights;                    // channels x fft_bins, peak 1 per row

  static GammatoneFilterbank design(std::size_t channels, std::size_t fft_size,
                                    int sample_rate, double min_hz);
  // |H_c(f)| / |H_c(f_c)| for channel c.
  double response(std::size_t c, double hz) const;
};

// Geometry of the constant-Q bank: bins * bins_per_octave^-1 octaves ending
// below fs / 2, f_min = fs / 2^(octaves + 1), Q = 1 / (2^(1/b) - 1).
struct CqtGeometry {
  std::size_t bins = 0;
  std::size_t bins_per_octave = 0;
  double f_min = 0.0;
  double q = 0.0;
  std::vector<double> center_hz;
  std::vector<std::size_t> kernel_length;  // ceil(Q * fs / f_k)

  static CqtGeometry design(std::size_t bins, std::size_t bins_per_octave,
                            int sample_rate);
};

struct Spectrogram {
  SpectrogramKind kind = SpectrogramKind::kLogMel;
  SpectrogramConfig config;
  Matrix values;  // frames x n_filters
  std::string segment_id;
  int sample_rate = 0;
  std::optional<std::string> device_id;
  std::optional<int> label;

  std::size_t frames() const { return values.rows; }
  std::size_t bins() const { return values.cols; }
};

Spectrogram log_mel_spectrogram(const AudioSegment& audio,
                                const SpectrogramConfig& cfg);
Spectrogram gammatone_spectrogram(const AudioSegment& audio,
                                  const SpectrogramConfig& cfg);
// Throws std::invalid_argument when the longest kernel exceeds the audio.
Spectrogram cqt_spectrogram(const AudioSegment& audio,
                            const SpectrogramConfig& cfg);

// Dispatches on cfg.kind.
Spectrogram compute_spectrogram(const AudioSegment& audio,
                                const SpectrogramConfig& cfg);

// Shortest audio (in samples) every kind accepts at this rate.
std::size_t min_samples_for_all_kinds(int sample_rate,
                                      const SpectrogramConfig& cfg);

}  // namespace asc::dsp

#endif  // ASC_DSP_SPECTROGRAM_HPP_
