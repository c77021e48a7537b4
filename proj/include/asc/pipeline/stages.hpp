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

// In-memory building blocks of an experiment: audio loading, the
// three-kind front end, encoder and decoder stages and segment scoring.

#ifndef ASC_PIPELINE_STAGES_HPP_
#define ASC_PIPELINE_STAGES_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "asc/decoders/decoder.hpp"
#include "asc/dsp/patches.hpp"
#include "asc/encoder/training.hpp"
#include "asc/eval/evaluation.hpp"
#include "asc/io/manifest.hpp"
#include "asc/pipeline/config.hpp"

namespace asc::pipeline {

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<dsp::AudioSegment> segments;  // label = class index
  std::vector<eval::SegmentTruth> truth;    // same order as segments
};

// Segment ids are file stems and must be unique within the split.
Dataset load_split(const io::Manifest& manifest, io::Split split, int channel,
                   std::optional<int> fold = {});

// Per-kind z-score statistics fitted on training spectrograms.
struct FrontendStats {
  bool enabled = false;
  std::array<dsp::NormalizationStats, 3> stats;

  nlohmann::json to_json() const;
  static FrontendStats from_json(const nlohmann::json& j);
};

using SpectrogramSets = std::array<std::vector<dsp::Spectrogram>, 3>;

// All three kinds for every segment, in segment order, computed on up to
// `threads` workers.
SpectrogramSets compute_spectrograms(const std::vector<dsp::AudioSegment>& segments,
                                     const dsp::SpectrogramConfig& cfg,
                                     std::size_t threads);

FrontendStats fit_frontend(const SpectrogramSets& specs, bool enabled);

// Consumes the spectrograms; patches of one key are aligned across kinds.
encoder::PatchTriples to_triples(SpectrogramSets&& specs, const FrontendStats& stats,
                                 std::size_t n_classes);

encoder::PatchTriples extract_triples(const std::vector<dsp::AudioSegment>& segments,
                                      const dsp::SpectrogramConfig& cfg,
                                      const FrontendStats& stats,
                                      std::size_t n_classes, std::size_t threads);

encoder::EncoderConfig encoder_config(const ExperimentConfig& cfg,
                                      encoder::CombinerKind combiner,
                                      std::size_t n_classes);

struct EncoderRun {
  encoder::Encoder<float> model;
  std::vector<encoder::EpochLog> log;
};

EncoderRun train_encoder_stage(const ExperimentConfig& cfg,
                               encoder::CombinerKind combiner,
                               const encoder::PatchTriples& train,
                               std::function<void(const encoder::EpochLog&)> progress = {});

// Rows of one feature source with the patch labels.
augment::LabeledSet feature_set(const encoder::EncodedPatches& encoded,
                                encoder::FeatureSource source);

struct DecoderRun {
  std::unique_ptr<decoders::Decoder> model;
  std::vector<double> losses;
};

DecoderRun train_decoder_stage(const ExperimentConfig& cfg,
                               decoders::DecoderKind kind,
                               const encoder::EncodedPatches& train,
                               encoder::FeatureSource source,
                               std::function<void(std::size_t, double)> progress = {});

// Combined-head (DNN-02) probabilities per patch.
eval::PatchScores encoder_scores(const encoder::EncodedPatches& encoded);
eval::PatchScores decoder_scores(const decoders::Decoder& decoder,
                                 const encoder::EncodedPatches& encoded,
                                 encoder::FeatureSource source);

eval::EvaluationReport score(const eval::PatchScores& scores, const Dataset& data,
                             eval::Aggregation mode);

// Audio in, patch probabilities out. `decoder` null means the encoder's
// combined head.
eval::PatchPredictor make_predictor(const encoder::Encoder<float>& model,
                                    const decoders::Decoder* decoder,
                                    encoder::FeatureSource source,
                                    const dsp::SpectrogramConfig& spec,
                                    const FrontendStats& stats,
                                    std::size_t n_classes, std::size_t threads);

}  // namespace asc::pipeline

#endif  // ASC_PIPELINE_STAGES_HPP_
