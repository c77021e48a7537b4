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

// The experiment verbs behind the command-line tool. Each verb reads and
// writes artifacts under the run's output directory:
//
//   patches/{train,test}_<kind>.ascp, patches/frontend.json   extract
//   encoders/<comb>.asck, encoders/<comb>_log.csv             train-encoder
//   features/<comb>_{train,test}.ascf                         features
//   decoders/<comb>_<source>_<kind>.asck (+ _log.csv)         train-decoder
//   reports/...                                               evaluate, early-eval
//   grid.csv                                                  grid
//
// and leaves <verb>_config.ini, the resolved settings, beside them.

#ifndef ASC_PIPELINE_COMMANDS_HPP_
#define ASC_PIPELINE_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asc/eval/evaluation.hpp"
#include "asc/io/synthetic.hpp"
#include "asc/pipeline/config.hpp"
#include "asc/pipeline/gradcheck_suite.hpp"
#include "asc/pipeline/stages.hpp"

namespace asc::pipeline {

struct RunContext {
  Settings settings;
  ExperimentConfig cfg;
  std::ostream* log = nullptr;  // progress lines; null for silence

  explicit RunContext(Settings s);
};

class Layout {
 public:
  explicit Layout(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path patches(io::Split split, dsp::SpectrogramKind kind) const;
  std::filesystem::path frontend() const;
  std::filesystem::path encoder(encoder::CombinerKind comb) const;
  std::filesystem::path encoder_log(encoder::CombinerKind comb) const;
  std::filesystem::path features(encoder::CombinerKind comb, io::Split split) const;
  std::string decoder_stem(encoder::CombinerKind comb, encoder::FeatureSource source,
                           decoders::DecoderKind kind) const;
  std::filesystem::path decoder(encoder::CombinerKind comb, encoder::FeatureSource source,
                                decoders::DecoderKind kind) const;
  std::filesystem::path reports() const;
  std::filesystem::path grid() const;

 private:
  std::filesystem::path root_;
};

// Settings that determine an artifact; used to decide whether an existing
// file on disk can be reused.
nlohmann::json frontend_fingerprint(const Settings& settings);
nlohmann::json encoder_fingerprint(const Settings& settings);

// Ground truth of a split without reading audio.
std::vector<eval::SegmentTruth> split_truth(const io::Manifest& manifest, io::Split split,
                                            std::optional<int> fold);

io::SyntheticDataset cmd_synth(const RunContext& run);
void cmd_extract(const RunContext& run);
void cmd_train_encoder(const RunContext& run);
void cmd_features(const RunContext& run);
void cmd_train_decoder(const RunContext& run);

struct EvaluateResult {
  eval::EvaluationReport decoder;
  eval::EvaluationReport encoder_only;
};
EvaluateResult cmd_evaluate(const RunContext& run);
std::vector<eval::CropPoint> cmd_early_eval(const RunContext& run);

struct GridRow {
  encoder::CombinerKind combiner;
  std::optional<decoders::DecoderKind> decoder;  // empty: encoder only
  double accuracy = 0.0;
};
// Three encoders (one per combiner, reused from disk when their settings
// match) and three decoders each: 9 decoder rows and 3 encoder-only rows.
std::vector<GridRow> cmd_grid(const RunContext& run);

std::vector<GradCheckResult> cmd_gradcheck(const RunContext& run);

// Stored patch triples of one split; throws when extract has not run with
// the current front-end settings.
encoder::PatchTriples load_triples(const RunContext& run, io::Split split);
FrontendStats load_frontend(const RunContext& run);

}  // namespace asc::pipeline

#endif  // ASC_PIPELINE_COMMANDS_HPP_
