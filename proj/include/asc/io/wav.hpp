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

// RIFF/WAVE reading (PCM 16/24/32-bit, IEEE float 32-bit, including the
// extensible header) and writing.

#ifndef ASC_IO_WAV_HPP_
#define ASC_IO_WAV_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "asc/dsp/audio.hpp"

namespace asc::io {

enum class WavEncoding { kPcm16, kPcm24, kPcm32, kFloat32 };

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  WavEncoding encoding = WavEncoding::kPcm16;
  std::size_t frames = 0;
};

struct WavData {
  WavInfo info;
  std::vector<float> samples;  // interleaved, scaled to [-1, 1]
};

// Integer PCM is scaled by 1 / 2^(bits - 1). Throws std::runtime_error on
// an unsupported codec, a malformed header or a truncated data chunk.
WavData read_wav_data(const std::filesystem::path& path);

// One channel as an AudioSegment whose source_id is the file stem.
dsp::AudioSegment read_audio(const std::filesystem::path& path,
                             int channel = 0);

// Integer encodings round to nearest and clip to the representable range.
void write_wav(const std::filesystem::path& path,
               std::span<const float> interleaved, int channels,
               int sample_rate, WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace asc::io

#endif  // ASC_IO_WAV_HPP_
