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

#include "asc/eval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace asc::eval {
namespace {

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t argmax_f(std::span<const float> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

std::string_view to_string(Aggregation mode) {
  switch (mode) {
    case Aggregation::kMean: return "mean";
    case Aggregation::kMax: return "max";
    case Aggregation::kMajority: return "majority";
  }
  return "?";
}

Aggregation aggregation_from_string(std::string_view name) {
  if (name == "mean") return Aggregation::kMean;
  if (name == "max") return Aggregation::kMax;
  if (name == "majority" || name == "vote") return Aggregation::kMajority;
  throw std::invalid_argument("unknown aggregation '" + std::string(name) +
                              "' (expected mean, max or majority)");
}

SegmentDecision aggregate_segment(std::span<const float> patch_probs,
                                  std::size_t n_classes, Aggregation mode) {
  if (n_classes == 0) throw std::invalid_argument("aggregate_segment: no classes");
  if (patch_probs.empty() || patch_probs.size() % n_classes != 0) {
    throw std::invalid_argument("aggregate_segment: need at least one patch row of " +
                                std::to_string(n_classes) + " values");
  }
  const std::size_t n = patch_probs.size() / n_classes;
  SegmentDecision d;
  d.probs.assign(n_classes, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const auto row = patch_probs.subspan(p * n_classes, n_classes);
    switch (mode) {
      case Aggregation::kMean:
        for (std::size_t c = 0; c < n_classes; ++c) d.probs[c] += row[c];
        break;
      case Aggregation::kMax:
        for (std::size_t c = 0; c < n_classes; ++c) {
          d.probs[c] = std::max<double>(d.probs[c], row[c]);
        }
        break;
      case Aggregation::kMajority:
        d.probs[argmax_f(row)] += 1.0;
        break;
    }
  }
  double total = 0.0;
  for (double v : d.probs) total += v;
  if (total > 0.0) {
    for (double& v : d.probs) v /= total;
  } else {
    std::fill(d.probs.begin(), d.probs.end(), 1.0 / static_cast<double>(n_classes));
  }
  d.predicted = argmax(d.probs);
  return d;
}

SegmentPredictions aggregate_by_segment(const std::vector<dsp::PatchKey>& keys,
                                        std::span<const float> probs,
                                        std::size_t n_classes, Aggregation mode) {
  if (probs.size() != keys.size() * n_classes) {
    throw std::invalid_argument("aggregate_by_segment: " + std::to_string(keys.size()) +
                                " keys but " + std::to_string(probs.size()) +
                                " probabilities");
  }
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<float>> rows;
  SegmentPredictions out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [it, fresh] = slot.emplace(keys[i].segment_id, rows.size());
    if (fresh) {
      out.segment_ids.push_back(keys[i].segment_id);
      rows.emplace_back();
    }
    const auto row = probs.subspan(i * n_classes, n_classes);
    rows[it->second].insert(rows[it->second].end(), row.begin(), row.end());
  }
  for (const auto& r : rows) out.decisions.push_back(aggregate_segment(r, n_classes, mode));
  return out;
}

EvaluationReport evaluate(const SegmentPredictions& predictions,
                          const std::vector<SegmentTruth>& truth,
                          const std::vector<std::string>& class_names) {
  const std::size_t C = class_names.size();
  if (C == 0) throw std::invalid_argument("evaluate: no classes");
  if (predictions.segment_ids.size() != predictions.decisions.size()) {
    throw std::invalid_argument("evaluate: malformed predictions");
  }
  std::unordered_map<std::string, std::size_t> predicted;
  for (std::size_t i = 0; i < predictions.segment_ids.size(); ++i) {
    if (!predicted.emplace(predictions.segment_ids[i], predictions.decisions[i].predicted)
             .second) {
      throw std::invalid_argument("evaluate: two predictions for segment " +
                                  predictions.segment_ids[i]);
    }
  }
  EvaluationReport r;
  r.class_names = class_names;
  r.support.assign(C, 0);
  r.confusion.assign(C * C, 0);
  std::map<std::string, std::size_t> device_correct;
  std::size_t correct = 0;
  std::set<std::string> seen;
  for (const auto& t : truth) {
    if (!t.label) throw std::invalid_argument("evaluate: segment " + t.segment_id + " has no label");
    if (*t.label >= C) throw std::invalid_argument("evaluate: label out of range for " + t.segment_id);
    if (!seen.insert(t.segment_id).second) {
      throw std::invalid_argument("evaluate: segment " + t.segment_id + " listed twice");
    }
    const auto it = predicted.find(t.segment_id);
    if (it == predicted.end()) {
      throw std::invalid_argument("evaluate: no prediction for segment " + t.segment_id);
    }
    if (it->second >= C) throw std::invalid_argument("evaluate: predicted class out of range");
    const bool hit = it->second == *t.label;
    ++r.support[*t.label];
    ++r.confusion[*t.label * C + it->second];
    correct += hit;
    if (t.device) {
      ++r.device_support[*t.device];
      device_correct[*t.device] += hit;
    }
  }
  if (predicted.size() != seen.size()) {
    throw std::invalid_argument("evaluate: predictions for segments without ground truth");
  }
  r.n_segments = truth.size();
  if (r.n_segments == 0) throw std::invalid_argument("evaluate: no segments");
  r.overall = static_cast<double>(correct) / static_cast<double>(r.n_segments);
  r.per_class.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    if (r.support[c] > 0) {
      r.per_class[c] = static_cast<double>(r.confusion[c * C + c]) /
                       static_cast<double>(r.support[c]);
    }
  }
  for (const auto& [device, n] : r.device_support) {
    r.per_device[device] = static_cast<double>(device_correct[device]) / static_cast<double>(n);
  }
  return r;
}

std::size_t patches_in_crop(double seconds, int sample_rate,
                            const dsp::SpectrogramConfig& cfg) {
  const auto samples = static_cast<std::size_t>(std::floor(seconds * sample_rate));
  if (samples < dsp::min_samples_for_all_kinds(sample_rate, cfg)) return 0;
  return dsp::frame_geometry(samples, sample_rate, cfg).frames / dsp::kPatchSize;
}

std::vector<CropPoint> early_classification_curve(
    const PatchPredictor& predictor, const std::vector<dsp::AudioSegment>& segments,
    const std::vector<SegmentTruth>& truth,
    const std::vector<std::string>& class_names,
    const std::vector<double>& crop_seconds, const dsp::SpectrogramConfig& cfg,
    Aggregation mode) {
  if (segments.empty()) throw std::invalid_argument("early_classification_curve: no segments");
  double shortest = segments.front().duration_seconds();
  for (const auto& s : segments) shortest = std::min(shortest, s.duration_seconds());
  std::vector<CropPoint> curve;
  for (double k : crop_seconds) {
    if (!(k > 0.0) || k > shortest + 1e-9) {
      throw std::invalid_argument("early_classification_curve: crop of " + fmt(k) +
                                  " s exceeds the shortest segment (" + fmt(shortest) + " s)");
    }
    CropPoint point;
    point.seconds = k;
    std::size_t fewest = SIZE_MAX;
    for (const auto& s : segments) {
      fewest = std::min(fewest, patches_in_crop(std::min(k, s.duration_seconds()),
                                                s.sample_rate, cfg));
    }
    point.patches_per_segment = fewest;
    if (fewest > 0) {
      std::vector<dsp::AudioSegment> cropped;
      cropped.reserve(segments.size());
      for (const auto& s : segments) cropped.push_back(s.head(k));
      const PatchScores scores = predictor(cropped);
      const auto preds = aggregate_by_segment(scores.keys, scores.probs,
                                              class_names.size(), mode);
      point.accuracy = evaluate(preds, truth, class_names).overall;
    }
    curve.push_back(point);
  }
  return curve;
}

EvaluationReport kfold_average(const std::vector<EvaluationReport>& folds) {
  if (folds.empty()) throw std::invalid_argument("kfold_average: no folds");
  const auto& first = folds.front();
  const std::size_t C = first.n_classes();
  EvaluationReport out;
  out.class_names = first.class_names;
  out.support.assign(C, 0);
  out.confusion.assign(C * C, 0);
  out.per_class.resize(C);
  std::vector<double> class_sum(C, 0.0);
  std::vector<std::size_t> class_folds(C, 0);
  std::map<std::string, std::pair<double, std::size_t>> device_sum;
  std::map<double, std::pair<double, std::size_t>> crop_sum;
  std::map<double, std::size_t> crop_seen;
  for (const auto& f : folds) {
    if (f.class_names != first.class_names) {
      throw std::invalid_argument("kfold_average: folds disagree on the class set");
    }
    out.overall += f.overall;
    out.n_segments += f.n_segments;
    for (std::size_t c = 0; c < C; ++c) {
      out.support[c] += f.support[c];
      if (f.per_class[c]) {
        class_sum[c] += *f.per_class[c];
        ++class_folds[c];
      }
    }
    for (std::size_t i = 0; i < C * C; ++i) out.confusion[i] += f.confusion[i];
    for (const auto& [d, acc] : f.per_device) {
      device_sum[d].first += acc;
      ++device_sum[d].second;
      out.device_support[d] += f.device_support.at(d);
    }
    for (const auto& p : f.crop_curve) {
      ++crop_seen[p.seconds];
      if (p.accuracy) {
        crop_sum[p.seconds].first += *p.accuracy;
        ++crop_sum[p.seconds].second;
      }
    }
  }
  out.overall /= static_cast<double>(folds.size());
  for (std::size_t c = 0; c < C; ++c) {
    if (class_folds[c]) out.per_class[c] = class_sum[c] / static_cast<double>(class_folds[c]);
  }
  for (const auto& [d, s] : device_sum) out.per_device[d] = s.first / static_cast<double>(s.second);
  for (const auto& [k, n] : crop_seen) {
    (void)n;
    CropPoint p;
    p.seconds = k;
    if (const auto it = crop_sum.find(k); it != crop_sum.end()) {
      p.accuracy = it->second.first / static_cast<double>(it->second.second);
    }
    out.crop_curve.push_back(p);
  }
  return out;
}

void write_report_csv(const std::filesystem::path& path,
                      const EvaluationReport& report) {
  auto out = open_out(path);
  out << "metric,key,value\n";
  out << "overall_accuracy,," << fmt(report.overall) << '\n';
  out << "segments,," << report.n_segments << '\n';
  if (report.fold) out << "fold,," << *report.fold << '\n';
  for (std::size_t c = 0; c < report.n_classes(); ++c) {
    const std::string name = csv_field(report.class_names[c]);
    out << "class_accuracy," << name << ','
        << (report.per_class[c] ? fmt(*report.per_class[c]) : std::string()) << '\n';
    out << "class_support," << name << ',' << report.support[c] << '\n';
  }
  for (const auto& [d, acc] : report.per_device) {
    out << "device_accuracy," << csv_field(d) << ',' << fmt(acc) << '\n';
    out << "device_support," << csv_field(d) << ',' << report.device_support.at(d) << '\n';
  }
  for (const auto& p : report.crop_curve) {
    out << "crop_accuracy," << fmt(p.seconds) << ','
        << (p.accuracy ? fmt(*p.accuracy) : std::string()) << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_confusion_csv(const std::filesystem::path& path,
                         const EvaluationReport& report) {
  auto out = open_out(path);
  out << "truth\\predicted";
  for (const auto& name : report.class_names) out << ',' << csv_field(name);
  out << '\n';
  for (std::size_t t = 0; t < report.n_classes(); ++t) {
    out << csv_field(report.class_names[t]);
    for (std::size_t p = 0; p < report.n_classes(); ++p) out << ',' << report.confusion_at(t, p);
    out << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_curve_csv(const std::filesystem::path& path,
                     const std::vector<CropPoint>& curve) {
  auto out = open_out(path);
  out << "crop_length,accuracy\n";
  for (const auto& p : curve) {
    out << fmt(p.seconds) << ',' << (p.accuracy ? fmt(*p.accuracy) : std::string()) << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace asc::eval
