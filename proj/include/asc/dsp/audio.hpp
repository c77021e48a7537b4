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

#ifndef ASC_DSP_AUDIO_HPP_
#define ASC_DSP_AUDIO_HPP_

#include <optional>
#include <string>
#include <vector>

namespace asc::dsp {

// Mono audio with its provenance. Samples are expected in [-1, 1].
struct AudioSegment {
  std::vector<float> samples;
  int sample_rate = 0;
  std::string source_id;
  std::optional<std::string> device_id;
  std::optional<int> label;

  // Throws std::invalid_argument on a non-positive rate, empty samples or a
  // non-finite sample.
  void validate() const;

  double duration_seconds() const;

  // Copy holding only the first `seconds` of audio (all of it if shorter).
  AudioSegment head(double seconds) const;
};

}  // namespace asc::dsp

#endif  // ASC_DSP_AUDIO_HPP_
