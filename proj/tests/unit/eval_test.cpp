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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "asc/eval/evaluation.hpp"

namespace fs = std::filesystem;
using namespace asc;
using eval::Aggregation;

namespace {

eval::SegmentPredictions preds(const std::vector<std::pair<std::string, std::size_t>>& v,
                               std::size_t C) {
  eval::SegmentPredictions p;
  for (const auto& [id, cls] : v) {
    p.segment_ids.push_back(id);
    eval::SegmentDecision d;
    d.probs.assign(C, 0.0);
    d.probs[cls] = 1.0;
    d.predicted = cls;
    p.decisions.push_back(d);
  }
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST(Aggregate, SinglePatchIsItself) {
  const std::vector<float> p = {0.1f, 0.7f, 0.2f};
  const auto d = eval::aggregate_segment(p, 3);
  EXPECT_EQ(d.predicted, 1u);
  EXPECT_NEAR(d.probs[1], 0.7, 1e-7);
}

TEST(Aggregate, TieGoesToLowestClass) {
  const std::vector<float> p = {0.8f, 0.2f, 0.2f, 0.8f};
  const auto d = eval::aggregate_segment(p, 2);
  EXPECT_NEAR(d.probs[0], 0.5, 1e-7);
  EXPECT_NEAR(d.probs[1], 0.5, 1e-7);
  EXPECT_EQ(d.predicted, 0u);
  EXPECT_EQ(eval::aggregate_segment(p, 2, Aggregation::kMajority).predicted, 0u);
  EXPECT_EQ(eval::aggregate_segment(p, 2, Aggregation::kMax).predicted, 0u);
}

TEST(Aggregate, MeanSumsToOneOverRandomInputs) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t C = 2 + trial % 6, n = 1 + trial % 13;
    std::vector<float> p(n * C);
    for (std::size_t r = 0; r < n; ++r) {
      float s = 0;
      for (std::size_t c = 0; c < C; ++c) s += p[r * C + c] = u(rng);
      for (std::size_t c = 0; c < C; ++c) p[r * C + c] /= s;
    }
    for (auto mode : {Aggregation::kMean, Aggregation::kMax, Aggregation::kMajority}) {
      const auto d = eval::aggregate_segment(p, C, mode);
      double total = 0;
      for (double v : d.probs) total += v;
      ASSERT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(Aggregate, MajorityAndMaxModes) {
  // Votes: 0, 1, 1 -> class 1; max picks the single confident patch.
  const std::vector<float> p = {0.95f, 0.05f, 0.4f, 0.6f, 0.45f, 0.55f};
  const auto vote = eval::aggregate_segment(p, 2, Aggregation::kMajority);
  EXPECT_EQ(vote.predicted, 1u);
  EXPECT_NEAR(vote.probs[1], 2.0 / 3.0, 1e-12);
  EXPECT_EQ(eval::aggregate_segment(p, 2, Aggregation::kMax).predicted, 0u);
  EXPECT_EQ(eval::aggregate_segment(p, 2, Aggregation::kMean).predicted, 0u);
}

TEST(Aggregate, EmptyIsAnError) {
  EXPECT_THROW(eval::aggregate_segment({}, 3), std::invalid_argument);
  EXPECT_THROW(eval::aggregate_segment(std::vector<float>{1.f, 0.f}, 3), std::invalid_argument);
}

TEST(Aggregate, GroupsBySegmentInFirstSeenOrder) {
  const std::vector<dsp::PatchKey> keys = {{"b", 0}, {"a", 0}, {"b", 1}};
  const std::vector<float> probs = {0.2f, 0.8f, 0.9f, 0.1f, 0.4f, 0.6f};
  const auto s = eval::aggregate_by_segment(keys, probs, 2);
  ASSERT_EQ(s.segment_ids, (std::vector<std::string>{"b", "a"}));
  EXPECT_NEAR(s.decisions[0].probs[1], 0.7, 1e-7);
  EXPECT_EQ(s.decisions[1].predicted, 0u);
}

TEST(Evaluate, AllCorrectGivesDiagonal) {
  const std::vector<std::string> names = {"bus", "park", "street"};
  std::vector<eval::SegmentTruth> truth;
  std::vector<std::pair<std::string, std::size_t>> v;
  for (std::size_t i = 0; i < 9; ++i) {
    truth.push_back({"s" + std::to_string(i), i % 3, std::nullopt});
    v.emplace_back("s" + std::to_string(i), i % 3);
  }
  const auto r = eval::evaluate(preds(v, 3), truth, names);
  EXPECT_EQ(r.overall, 1.0);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 3; ++p) EXPECT_EQ(r.confusion_at(t, p), t == p ? 3u : 0u);
  }
  EXPECT_TRUE(r.per_device.empty());
}

TEST(Evaluate, OneClassFullyWrong) {
  std::vector<eval::SegmentTruth> truth;
  std::vector<std::pair<std::string, std::size_t>> v;
  for (std::size_t i = 0; i < 10; ++i) {
    truth.push_back({"s" + std::to_string(i), i % 2, std::nullopt});
    v.emplace_back("s" + std::to_string(i), 0);
  }
  const auto r = eval::evaluate(preds(v, 2), truth, {"a", "b"});
  EXPECT_EQ(r.overall, 0.5);
  EXPECT_EQ(r.per_class[0], 1.0);
  EXPECT_EQ(r.per_class[1], 0.0);
  // Balanced supports: mean per-class equals overall exactly.
  EXPECT_EQ((*r.per_class[0] + *r.per_class[1]) / 2.0, r.overall);
  std::size_t total = 0;
  for (std::size_t c : r.confusion) total += c;
  EXPECT_EQ(total, r.n_segments);
}

TEST(Evaluate, DevicePartition) {
  std::vector<eval::SegmentTruth> truth = {
      {"a1", 0, "A"}, {"a2", 1, "A"}, {"b1", 0, "B"}, {"b2", 1, "B"}};
  const auto r = eval::evaluate(preds({{"a1", 1}, {"a2", 0}, {"b1", 0}, {"b2", 1}}, 2),
                                truth, {"x", "y"});
  EXPECT_EQ(r.per_device.at("B"), 1.0);
  EXPECT_EQ(r.per_device.at("A"), 0.0);
  EXPECT_EQ(r.device_support.at("B"), 2u);
}

TEST(Evaluate, Errors) {
  const auto p = preds({{"s0", 0}}, 2);
  EXPECT_THROW(eval::evaluate(p, {{"s0", std::nullopt, std::nullopt}}, {"a", "b"}),
               std::invalid_argument);
  EXPECT_THROW(eval::evaluate(p, {{"s1", 0, std::nullopt}}, {"a", "b"}), std::invalid_argument);
  EXPECT_THROW(eval::evaluate(preds({{"s0", 0}, {"s1", 0}}, 2), {{"s0", 0, std::nullopt}},
                              {"a", "b"}),
               std::invalid_argument);
}

TEST(EarlyCurve, PatchCountsFromFrameArithmetic) {
  dsp::SpectrogramConfig cfg;
  // Oracle: N = round(43 ms * fs), hop = round(6 ms * fs),
  // frames = 1 + floor((samples - N) / hop), patches = floor(frames / 128).
  auto oracle = [](double seconds, int fs) -> std::size_t {
    const long n = std::lround(0.043 * fs), hop = std::lround(0.006 * fs);
    const long samples = static_cast<long>(seconds * fs);
    if (samples < n) return 0;
    return static_cast<std::size_t>((1 + (samples - n) / hop) / 128);
  };
  EXPECT_EQ(eval::patches_in_crop(2.0, 16000, cfg), 2u);
  EXPECT_EQ(eval::patches_in_crop(2.0, 16000, cfg), oracle(2.0, 16000));
  EXPECT_EQ(eval::patches_in_crop(0.5, 16000, cfg), 0u);
  EXPECT_EQ(eval::patches_in_crop(10.0, 16000, cfg), oracle(10.0, 16000));
  EXPECT_EQ(eval::patches_in_crop(4.0, 44100, cfg), oracle(4.0, 44100));
}

namespace {

// Stand-in stack: each patch votes by the sign of its mean sample. The
// verdict depends on crop length for the noisy segments.
eval::PatchScores toy_predictor(const std::vector<dsp::AudioSegment>& segs,
                                const dsp::SpectrogramConfig& cfg) {
  eval::PatchScores out;
  for (const auto& s : segs) {
    const std::size_t n = eval::patches_in_crop(s.duration_seconds(), s.sample_rate, cfg);
    const std::size_t span = s.samples.size() / std::max<std::size_t>(n, 1);
    for (std::size_t p = 0; p < n; ++p) {
      double mean = 0;
      for (std::size_t i = p * span; i < (p + 1) * span; ++i) mean += s.samples[i];
      out.keys.push_back({s.source_id, p});
      const float a = mean > 0 ? 0.8f : 0.3f;
      out.probs.push_back(a);
      out.probs.push_back(1.0f - a);
    }
  }
  return out;
}

}  // namespace

TEST(EarlyCurve, FullLengthMatchesEvaluateAndShortCropIsMissing) {
  dsp::SpectrogramConfig cfg;
  std::mt19937 rng(3);
  std::normal_distribution<float> g;
  std::vector<dsp::AudioSegment> segs;
  std::vector<eval::SegmentTruth> truth;
  for (int i = 0; i < 8; ++i) {
    dsp::AudioSegment s;
    s.sample_rate = 16000;
    s.source_id = "seg" + std::to_string(i);
    s.samples.resize(16000 * 4);
    for (auto& v : s.samples) v = 0.1f * g(rng) + (i % 2 ? -0.002f : 0.002f);
    segs.push_back(s);
    truth.push_back({s.source_id, static_cast<std::size_t>(i % 2), std::nullopt});
  }
  auto predictor = [&](const std::vector<dsp::AudioSegment>& s) { return toy_predictor(s, cfg); };
  const std::vector<std::string> names = {"pos", "neg"};
  const auto curve = eval::early_classification_curve(predictor, segs, truth, names,
                                                      {0.5, 1.0, 2.0, 4.0}, cfg);
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_FALSE(curve[0].accuracy.has_value());
  EXPECT_TRUE(curve[1].accuracy.has_value());
  const auto full = predictor(segs);
  const auto report = eval::evaluate(eval::aggregate_by_segment(full.keys, full.probs, 2),
                                     truth, names);
  EXPECT_EQ(*curve[3].accuracy, report.overall);
  EXPECT_THROW(eval::early_classification_curve(predictor, segs, truth, names, {5.0}, cfg),
               std::invalid_argument);
}

TEST(KFold, AveragesAndIdempotence) {
  auto report = [](double acc) {
    eval::EvaluationReport r;
    r.class_names = {"a", "b"};
    r.overall = acc;
    r.n_segments = 10;
    r.support = {5, 5};
    r.per_class = {acc, acc};
    r.confusion = {4, 1, 1, 4};
    r.per_device = {{"A", acc}};
    r.device_support = {{"A", 10}};
    return r;
  };
  EXPECT_NEAR(eval::kfold_average({report(0.9), report(0.7)}).overall, 0.8, 1e-12);
  const auto single = eval::kfold_average({report(0.65)});
  EXPECT_EQ(single.overall, 0.65);
  EXPECT_EQ(single.per_class[1], 0.65);
  const auto twenty = eval::kfold_average(std::vector<eval::EvaluationReport>(20, report(0.75)));
  EXPECT_EQ(twenty.overall, 0.75);
  EXPECT_EQ(twenty.per_device.at("A"), 0.75);
  auto other = report(0.5);
  other.class_names = {"a", "c"};
  EXPECT_THROW(eval::kfold_average({report(0.5), other}), std::invalid_argument);
  EXPECT_THROW(eval::kfold_average({}), std::invalid_argument);
}

TEST(Csv, ReportsAreDeterministic) {
  const fs::path dir = fs::temp_directory_path() / ("asc_eval_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::vector<eval::SegmentTruth> truth = {{"x", 0, "A"}, {"y", 1, "B"}, {"z", 1, "B"}};
  const auto r = eval::evaluate(preds({{"x", 0}, {"y", 0}, {"z", 1}}, 2), truth,
                                {"one", "two, quoted"});
  eval::write_report_csv(dir / "r1.csv", r);
  eval::write_report_csv(dir / "r2.csv", r);
  eval::write_confusion_csv(dir / "c.csv", r);
  eval::write_curve_csv(dir / "k.csv", {{1.0, std::nullopt, 0}, {2.0, 0.5, 2}});
  EXPECT_EQ(slurp(dir / "r1.csv"), slurp(dir / "r2.csv"));
  EXPECT_NE(slurp(dir / "r1.csv").find("overall_accuracy,,0.6666666666666666\n"), std::string::npos);
  EXPECT_EQ(slurp(dir / "c.csv"),
            "truth\\predicted,one,\"two, quoted\"\none,1,0\n\"two, quoted\",1,1\n");
  EXPECT_EQ(slurp(dir / "k.csv"), "crop_length,accuracy\n1,\n2,0.5\n");
  fs::remove_all(dir);
}
