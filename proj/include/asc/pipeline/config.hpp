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

// Experiment settings: a flat table of `section.key` strings with
// defaults, overlaid in order by an INI file, ASC_<SECTION>_<KEY>
// environment variables and explicit overrides, then resolved into typed
// configuration.

#ifndef ASC_PIPELINE_CONFIG_HPP_
#define ASC_PIPELINE_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asc/augment/mixup.hpp"
#include "asc/decoders/decoder.hpp"
#include "asc/dsp/spectrogram.hpp"
#include "asc/encoder/training.hpp"
#include "asc/eval/evaluation.hpp"
#include "asc/io/synthetic.hpp"

namespace asc::pipeline {

class Settings {
 public:
  // Starts from the built-in defaults.
  Settings();

  // Unknown keys throw std::invalid_argument naming the key and source.
  void load_file(const std::filesystem::path& path);
  void load_ini(const std::string& text, const std::string& source);
  // ASC_ENCODER_EPOCHS=5 sets encoder.epochs. Unknown ASC_ variables are
  // ignored. `environ` is read when env is empty.
  void apply_environment(const std::vector<std::string>& env = {});
  void set(const std::string& key, const std::string& value,
           const std::string& source = "override");

  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const;
  std::string source_of(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // INI text of every setting, grouped by section, with origin comments.
  std::string to_ini() const;
  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> sources_;
};

struct ExperimentConfig {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  int channel = 0;
  std::optional<int> fold;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  dsp::SpectrogramConfig spectrogram;
  bool normalize = false;

  augment::MixupConfig mixup;
  bool use_mixup = true;

  encoder::CombinerKind combiner = encoder::CombinerKind::kLin;
  encoder::WidthProfile profile = encoder::WidthProfile::kFull;
  encoder::EncoderTrainConfig encoder_train;

  decoders::DecoderKind decoder = decoders::DecoderKind::kMoe;
  encoder::FeatureSource decoder_source = encoder::FeatureSource::kCombined;
  decoders::DecoderOptions decoder_options;
  decoders::DecoderTrainConfig decoder_train;

  std::vector<double> crop_lengths;
  eval::Aggregation aggregation = eval::Aggregation::kMean;

  io::SyntheticConfig synth;
};

// Throws std::invalid_argument naming the offending key.
ExperimentConfig resolve(const Settings& settings);

}  // namespace asc::pipeline

#endif  // ASC_PIPELINE_CONFIG_HPP_
