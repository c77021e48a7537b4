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

// Segment-level scoring: patch-to-segment aggregation, accuracy reports
// with per-class and per-device breakdowns, early-classification curves
// and fold averaging.

#ifndef ASC_EVAL_EVALUATION_HPP_
#define ASC_EVAL_EVALUATION_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asc/dsp/audio.hpp"
#include "asc/dsp/patches.hpp"
#include "asc/dsp/spectrogram.hpp"

namespace asc::eval {

enum class Aggregation { kMean, kMax, kMajority };

std::string_view to_string(Aggregation mode);
Aggregation aggregation_from_string(std::string_view name);

struct SegmentDecision {
  std::vector<double> probs;  // sums to 1
  std::size_t predicted = 0;  // argmax, lowest index on ties
};

// `patch_probs` holds n_patches rows of n_classes. kMean averages rows;
// kMax takes the elementwise max and renormalizes; kMajority returns vote
// shares of the per-patch argmax.
SegmentDecision aggregate_segment(std::span<const float> patch_probs,
                                  std::size_t n_classes,
                                  Aggregation mode = Aggregation::kMean);

struct SegmentPredictions {
  std::vector<std::string> segment_ids;  // first-seen order
  std::vector<SegmentDecision> decisions;
};

// Groups patch rows by segment id.
SegmentPredictions aggregate_by_segment(const std::vector<dsp::PatchKey>& keys,
                                        std::span<const float> probs,
                                        std::size_t n_classes,
                                        Aggregation mode = Aggregation::kMean);

struct SegmentTruth {
  std::string segment_id;
  std::optional<std::size_t> label;
  std::optional<std::string> device;
};

struct CropPoint {
  double seconds = 0.0;
  std::optional<double> accuracy;  // missing when a crop yields no patch
  std::size_t patches_per_segment = 0;
};

struct EvaluationReport {
  std::vector<std::string> class_names;
  std::size_t n_segments = 0;
  double overall = 0.0;
  std::vector<std::size_t> support;                // per true class
  std::vector<std::optional<double>> per_class;    // missing without support
  std::map<std::string, double> per_device;        // only with device metadata
  std::map<std::string, std::size_t> device_support;
  std::vector<std::size_t> confusion;              // row = truth, col = prediction
  std::vector<CropPoint> crop_curve;
  std::optional<int> fold;

  std::size_t n_classes() const { return class_names.size(); }
  std::size_t confusion_at(std::size_t truth, std::size_t pred) const {
    return confusion[truth * n_classes() + pred];
  }
};

// Every truth entry needs a label and exactly one prediction, and every
// prediction needs a truth entry.
EvaluationReport evaluate(const SegmentPredictions& predictions,
                          const std::vector<SegmentTruth>& truth,
                          const std::vector<std::string>& class_names);

// Maps audio to patch probabilities; the stack under test.
struct PatchScores {
  std::vector<dsp::PatchKey> keys;
  std::vector<float> probs;  // keys.size() x n_classes
};
using PatchPredictor =
    std::function<PatchScores(const std::vector<dsp::AudioSegment>&)>;

// Patches a crop of `seconds` yields under the spectrogram geometry; zero
// when some spectrogram kind cannot be computed on it.
std::size_t patches_in_crop(double seconds, int sample_rate,
                            const dsp::SpectrogramConfig& cfg);

// For each crop length the predictor sees only the first `k` seconds of
// every segment. A crop that leaves some segment without patches gives a
// missing point. The crop at full duration reproduces evaluate() exactly.
std::vector<CropPoint> early_classification_curve(
    const PatchPredictor& predictor, const std::vector<dsp::AudioSegment>& segments,
    const std::vector<SegmentTruth>& truth,
    const std::vector<std::string>& class_names,
    const std::vector<double>& crop_seconds, const dsp::SpectrogramConfig& cfg,
    Aggregation mode = Aggregation::kMean);

// Unweighted fold mean. Per-class and per-device entries are averaged over
// the folds that define them; confusion counts are summed.
EvaluationReport kfold_average(const std::vector<EvaluationReport>& folds);

// metric,key,value rows (overall, class, device, support).
void write_report_csv(const std::filesystem::path& path,
                      const EvaluationReport& report);
// Header row of predicted class names; one row per true class.
void write_confusion_csv(const std::filesystem::path& path,
                         const EvaluationReport& report);
// crop_length,accuracy with an empty cell for a missing point.
void write_curve_csv(const std::filesystem::path& path,
                     const std::vector<CropPoint>& curve);

}  // namespace asc::eval

#endif  // ASC_EVAL_EVALUATION_HPP_
