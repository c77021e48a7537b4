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

#include "asc/dsp/audio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asc::dsp {

void AudioSegment::validate() const {
  if (sample_rate <= 0) {
    throw std::invalid_argument("audio '" + source_id +
                                "': sample rate must be positive");
  }
  if (samples.empty()) {
    throw std::invalid_argument("audio '" + source_id + "': no samples");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw std::invalid_argument("audio '" + source_id +
                                  "': non-finite sample at index " +
                                  std::to_string(i));
    }
  }
}

double AudioSegment::duration_seconds() const {
  return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                         : 0.0;
}

AudioSegment AudioSegment::head(double seconds) const {
  AudioSegment out;
  out.sample_rate = sample_rate;
  out.source_id = source_id;
  out.device_id = device_id;
  out.label = label;
  const auto want = static_cast<std::size_t>(
      std::max(0.0, std::floor(seconds * sample_rate + 1e-9)));
  const std::size_t n = std::min(want, samples.size());
  out.samples.assign(samples.begin(), samples.begin() + static_cast<long>(n));
  return out;
}

}  // namespace asc::dsp
