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

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "asc/encoder/encoder.hpp"
#include "asc/encoder/training.hpp"
#include "asc/nn/gradcheck.hpp"

namespace asc::encoder {
namespace {

using nn::Mode;
using nn::Tensor;

template <typename T>
Tensor<T> random_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1,
                        double hi = 1) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

TEST(ArchitectureTest, FullProfileBlockShapes) {
  nn::Sequential<float> cnn({1, 128, 128}, cnn_specs(WidthProfile::kFull), 1);
  // Output shape after each block's dropout.
  const std::vector<nn::Shape> expected = {
      {32, 64, 64}, {64, 32, 32}, {128, 32, 32},
      {128, 16, 16}, {256, 16, 16}, {256}};
  std::vector<nn::Shape> got;
  nn::Shape shape = cnn.input_shape();
  for (std::size_t i = 0; i < cnn.size(); ++i) {
    shape = cnn.layer(i).output_shape(shape);
    if (cnn.layer(i).name() == "Dropout") got.push_back(shape);
  }
  EXPECT_EQ(got, expected);
}

TEST(ArchitectureTest, BlockRecipe) {
  const auto specs = cnn_specs(WidthProfile::kCompact);
  using nn::LayerKind;
  const std::vector<LayerKind> block1 = {
      LayerKind::kBatchNorm, LayerKind::kConv2D, LayerKind::kReLU,
      LayerKind::kBatchNorm, LayerKind::kAvgPool, LayerKind::kDropout};
  for (std::size_t i = 0; i < block1.size(); ++i) {
    EXPECT_EQ(specs[i].kind, block1[i]);
  }
  EXPECT_EQ(specs[1].kernel_h, 9u);
  EXPECT_DOUBLE_EQ(specs[5].rate, 0.1);
  EXPECT_EQ(specs.back().kind, LayerKind::kDropout);
  EXPECT_EQ(specs[specs.size() - 2].kind, LayerKind::kGlobalAvgPool);
  EXPECT_DOUBLE_EQ(specs.back().rate, 0.25);
}

TEST(ArchitectureTest, HeadWidths) {
  nn::Sequential<float> dnn2({256}, dnn02_specs(5), 1);
  std::vector<nn::Shape> dense_out;
  nn::Shape shape = dnn2.input_shape();
  for (std::size_t i = 0; i < dnn2.size(); ++i) {
    shape = dnn2.layer(i).output_shape(shape);
    if (dnn2.layer(i).name() == "Dense") dense_out.push_back(shape);
  }
  EXPECT_EQ(dense_out, (std::vector<nn::Shape>{{512}, {1024}, {5}}));
  EXPECT_EQ(dnn01_specs(7).size(), 1u);
  EXPECT_EQ(dnn01_specs(7)[0].units, 7u);
}

TEST(CombinerTest, WorkedExamples) {
  Tensor<float> z({1, 2});
  EXPECT_EQ(Combiner<float>(CombinerKind::kSum, 2).infer(z, z, z), z);
  Tensor<float> a({1, 2}, std::vector<float>{1, 5});
  Tensor<float> b({1, 2}, std::vector<float>{3, 2});
  Tensor<float> c({1, 2}, std::vector<float>{2, 4});
  const auto m = Combiner<float>(CombinerKind::kMax, 2).infer(a, b, c);
  EXPECT_EQ(m.storage(), (std::vector<float>{3, 5}));
  Combiner<float> lin(CombinerKind::kLin, 2);
  lin.parameters()[3]->value.fill(-20.0f);  // inputs sum to at most 11
  EXPECT_EQ(lin.infer(a, b, c).storage(), (std::vector<float>{0, 0}));
}

TEST(CombinerTest, AlgebraicProperties) {
  std::mt19937_64 rng(42);
  Combiner<double> sum(CombinerKind::kSum, 256);
  Combiner<double> max(CombinerKind::kMax, 256);
  Combiner<double> lin(CombinerKind::kLin, 256);
  std::uniform_int_distribution<std::size_t> pick(0, 255);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_tensor<double>({1, 256}, rng, -3, 3);
    const auto y = random_tensor<double>({1, 256}, rng, -3, 3);
    const auto z = random_tensor<double>({1, 256}, rng, -3, 3);
    const auto s = sum.infer(x, y, z);
    const auto s2 = sum.infer(z, x, y);
    const auto s3 = sum.infer(y, z, x);
    for (std::size_t i = 0; i < 256; ++i) {
      ASSERT_NEAR(s[i], s2[i], 1e-12);
      ASSERT_NEAR(s[i], s3[i], 1e-12);
    }
    EXPECT_EQ(max.infer(x, x, x), x);
    const auto l = lin.infer(x, y, z);
    for (std::size_t i = 0; i < 256; ++i) {
      ASSERT_EQ(l[i], std::max(0.0, s[i]));
    }
    // Raising one coordinate of one input never lowers the max.
    const auto before = max.infer(x, y, z);
    auto bumped = y;
    const std::size_t d = pick(rng);
    bumped[d] += 0.5;
    const auto after = max.infer(x, bumped, z);
    for (std::size_t i = 0; i < 256; ++i) ASSERT_GE(after[i], before[i]);
  }
}

TEST(CombinerTest, DimensionMismatchThrows) {
  Combiner<float> c(CombinerKind::kSum, 4);
  Tensor<float> ok({2, 4}), bad({2, 3});
  EXPECT_THROW(c.infer(ok, bad, ok), std::invalid_argument);
  EXPECT_THROW(c.infer(bad, bad, bad), std::invalid_argument);
  EXPECT_THROW(combiner_kind_from_string("mean"), std::invalid_argument);
  EXPECT_EQ(combiner_kind_from_string("lin-comb"), CombinerKind::kLin);
}

TEST(CombinerTest, MaxGradientRoutesToWinner) {
  Combiner<double> max(CombinerKind::kMax, 2);
  Tensor<double> a({1, 2}, std::vector<double>{1, 5});
  Tensor<double> b({1, 2}, std::vector<double>{3, 2});
  Tensor<double> c({1, 2}, std::vector<double>{3, 4});
  max.forward(a, b, c);
  const auto g = max.backward(Tensor<double>({1, 2}, std::vector<double>{7, 9}));
  EXPECT_EQ(g[0].storage(), (std::vector<double>{0, 9}));
  EXPECT_EQ(g[1].storage(), (std::vector<double>{7, 0}));  // first on ties
  EXPECT_EQ(g[2].storage(), (std::vector<double>{0, 0}));
}

TEST(EncoderLossTest, SubstitutionExamples) {
  EncoderLossConfig cfg;
  EXPECT_NEAR(combine_losses({0.9, 0.9, 0.9}, 0.6, cfg), 1.5, 1e-12);
  cfg.alpha = 0.0;
  EXPECT_NEAR(combine_losses({0.9, 0.4, 0.2}, 0.6, cfg), 0.6, 1e-12);
  cfg = {};
  cfg.beta = 0.0;
  EXPECT_NEAR(combine_losses({0.7, 0.7, 0.7}, 3.0, cfg), 0.7, 1e-12);
  cfg.alpha = -1.0;
  EXPECT_THROW(combine_losses({0, 0, 0}, 0, cfg), std::invalid_argument);
}

EncoderConfig small_config(CombinerKind kind, std::uint64_t seed = 1) {
  EncoderConfig cfg;
  cfg.n_classes = 3;
  cfg.combiner = kind;
  cfg.profile = WidthProfile::kCompact;
  cfg.seed = seed;
  cfg.patch_size = 16;
  return cfg;
}

TEST(EncoderTest, ForwardShapesAndNormalization) {
  Encoder<float> enc(small_config(CombinerKind::kLin));
  std::mt19937_64 rng(3);
  std::array<Tensor<float>, 3> x;
  for (auto& t : x) t = random_tensor<float>({4, 1, 16, 16}, rng);
  const auto out = enc.forward(x, Mode::kTrain);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(out.features[k].shape(), (nn::Shape{4, 256}));
    EXPECT_EQ(out.logits[k].shape(), (nn::Shape{4, 3}));
  }
  const auto probs = nn::softmax_rows(out.logits[3]);
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) s += probs[r * 3 + c];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
  x[1] = random_tensor<float>({4, 1, 16, 8}, rng);
  EXPECT_THROW(enc.forward(x, Mode::kTrain), std::invalid_argument);
}

TEST(EncoderTest, BranchesAreIndependentButSymmetric) {
  Encoder<float> enc(small_config(CombinerKind::kSum));
  auto p0 = enc.cnn(0).parameters();
  auto p1 = enc.cnn(1).parameters();
  EXPECT_NE(p0[2]->value, p1[2]->value);  // different initial weights
  for (std::size_t b = 1; b < 3; ++b) {
    auto src = enc.cnn(0).parameters();
    auto dst = enc.cnn(b).parameters();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
    auto hs = enc.head(0).parameters();
    auto hd = enc.head(b).parameters();
    for (std::size_t i = 0; i < hs.size(); ++i) hd[i]->value = hs[i]->value;
  }
  std::mt19937_64 rng(4);
  const auto patch = random_tensor<float>({2, 1, 16, 16}, rng);
  const auto out = enc.infer({patch, patch, patch});
  EXPECT_EQ(out.logits[0], out.logits[1]);
  EXPECT_EQ(out.logits[0], out.logits[2]);
}

TEST(EncoderTest, ParameterNamesArePrefixed) {
  Encoder<float> enc(small_config(CombinerKind::kLin));
  std::vector<std::string> names;
  for (auto* p : enc.parameters()) names.push_back(p->name);
  auto has_prefix = [&](const std::string& pre) {
    return std::any_of(names.begin(), names.end(), [&](const std::string& n) {
      return n.rfind(pre, 0) == 0;
    });
  };
  for (const char* pre : {"cnn_lm.", "cnn_ga.", "cnn_cq.", "head_lm.",
                          "combiner.w_lm", "combiner.w_bias", "dnn2."}) {
    EXPECT_TRUE(has_prefix(pre)) << pre;
  }
  std::sort(names.begin(), names.end());
  EXPECT_EQ(std::adjacent_find(names.begin(), names.end()), names.end());
  EXPECT_FALSE(enc.buffers().empty());
}

TEST(EncoderTest, LinCombGradientThroughEncoderLoss) {
  Encoder<double> enc(small_config(CombinerKind::kLin, 5));
  std::mt19937_64 rng(6);
  std::array<Tensor<double>, 3> x;
  for (auto& t : x) t = random_tensor<double>({2, 1, 16, 16}, rng, -5, 5);
  Tensor<double> y({2, 3});
  y[0] = 0.7, y[1] = 0.3, y[5] = 1.0;
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (auto* p : enc.combiner().parameters()) {
    for (auto& v : p->value.values()) v += jitter(rng);
  }
  // Positive hidden biases keep every DNN-02 ReLU active, so a step of h
  // in the combined feature cannot cross a kink downstream.
  for (std::size_t i = 0; i < enc.dnn2().size(); ++i) {
    if (enc.dnn2().layer(i).name() != "Dense") continue;
    if (i + 1 == enc.dnn2().size()) break;
    enc.dnn2().layer(i).parameters()[1]->value.fill(5.0);
  }
  EncoderLossConfig cfg;
  nn::LossConfig reg;
  auto params = enc.parameters();
  auto loss_value = [&] {
    return encoder_loss(enc.forward(x, Mode::kEval), y, cfg, reg, params)
        .report.total;
  };
  enc.zero_grad();
  const auto out = enc.forward(x, Mode::kEval);
  const auto res = encoder_loss(out, y, cfg, reg, params);
  enc.backward(res.grad_logits);
  nn::add_l2_gradient(params, reg.l2_lambda);
  std::uniform_int_distribution<std::size_t> pick(0, kFeatureDim - 1);
  double worst = 0.0;
  for (auto* p : enc.combiner().parameters()) {
    for (int trial = 0; trial < 48; ++trial) {
      const std::size_t i = pick(rng);
      const double analytic = p->grad[i];
      worst = std::max(worst, nn::max_relative_error<double>(
                                  std::span<double>(p->value.data() + i, 1),
                                  std::span<const double>(&analytic, 1),
                                  loss_value));
    }
  }
  EXPECT_LT(worst, 1e-3);
}

// Class 0 puts energy in the low half of the frequency axis, class 1 in the
// high half.
PatchTriples separable_triples(std::size_t per_class, std::size_t side,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.3f);
  std::array<dsp::PatchSet, 3> sets;
  for (std::size_t k = 0; k < 3; ++k) {
    sets[k].kind = dsp::kAllKinds[k];
    sets[k].n_classes = 2;
  }
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        dsp::Patch p;
        p.key = {"seg" + std::to_string(c) + "_" + std::to_string(i), 0};
        p.kind = dsp::kAllKinds[k];
        p.values.resize(side * side);
        for (std::size_t t = 0; t < side; ++t) {
          for (std::size_t f = 0; f < side; ++f) {
            const bool low = f < side / 2;
            p.values[t * side + f] = (low == (c == 0) ? 1.0f : 0.0f) + noise(rng);
          }
        }
        p.label = {c == 0 ? 1.0f : 0.0f, c == 1 ? 1.0f : 0.0f};
        sets[k].patches.push_back(std::move(p));
      }
    }
  }
  // Scramble one kind's order; alignment must undo it.
  std::shuffle(sets[2].patches.begin(), sets[2].patches.end(), rng);
  return align_patch_sets(std::move(sets));
}

TEST(AlignmentTest, ReordersAndReportsOrphans) {
  auto triples = separable_triples(3, 16, 1);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    EXPECT_EQ(triples.sets[1].patches[i].key, triples.key(i));
    EXPECT_EQ(triples.sets[2].patches[i].key, triples.key(i));
  }
  std::array<dsp::PatchSet, 3> sets = triples.sets;
  sets[1].patches.pop_back();
  const std::string missing = triples.key(triples.size() - 1).to_string();
  try {
    align_patch_sets(sets);
    FAIL() << "expected orphan error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(missing), std::string::npos);
  }
  sets = triples.sets;
  std::swap(sets[0], sets[1]);
  EXPECT_THROW(align_patch_sets(sets), std::invalid_argument);
}

EncoderTrainConfig quick_train(std::uint64_t seed) {
  EncoderTrainConfig t;
  t.epochs = 5;
  t.batch_size = 12;
  t.learning_rate = 1e-3;
  t.seed = seed;
  return t;
}

TEST(TrainEncoderTest, LossDecreasesOnSeparableData) {
  const auto data = separable_triples(8, 32, 2);
  auto cfg = small_config(CombinerKind::kLin, 7);
  cfg.n_classes = 2;
  cfg.patch_size = 32;
  Encoder<float> enc(cfg);
  const auto log = train_encoder(enc, data, quick_train(7));
  ASSERT_EQ(log.size(), 5u);
  EXPECT_EQ(log[0].items, 48u);
  for (std::size_t e = 1; e < log.size(); ++e) {
    EXPECT_LT(log[e].loss.total, log[e - 1].loss.total) << "epoch " << e + 1;
  }
}

TEST(TrainEncoderTest, SeededRunsMatchAcrossThreadCounts) {
  const auto data = separable_triples(4, 32, 3);
  auto cfg = small_config(CombinerKind::kMax, 8);
  cfg.n_classes = 2;
  cfg.patch_size = 32;
  auto t = quick_train(8);
  t.epochs = 2;
  Encoder<float> a(cfg), b(cfg);
  const auto la = train_encoder(a, data, t);
  t.threads = 3;
  const auto lb = train_encoder(b, data, t);
  EXPECT_EQ(la.back().loss.total, lb.back().loss.total);
  auto pa = a.parameters();
  auto pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    ASSERT_EQ(pa[i]->value, pb[i]->value) << pa[i]->name;
  }
}

TEST(TrainEncoderTest, RejectsClassCountMismatch) {
  const auto data = separable_triples(2, 16, 4);
  Encoder<float> enc(small_config(CombinerKind::kSum));  // 3 classes
  EXPECT_THROW(train_encoder(enc, data, quick_train(1)), std::invalid_argument);
}

TEST(ExtractFeaturesTest, CountsDeterminismAndCombinerConsistency) {
  const auto data = separable_triples(3, 16, 5);
  EncoderConfig two = small_config(CombinerKind::kLin, 9);
  two.n_classes = 2;
  Encoder<float> model(two);
  const auto f1 = extract_features(model, data, 4);
  const auto f2 = extract_features(model, data, 5);
  ASSERT_EQ(f1.size(), 4 * data.size());
  for (std::size_t i = 0; i < f1.size(); ++i) {
    EXPECT_EQ(f1[i].values, f2[i].values);
    EXPECT_EQ(f1[i].values.size(), kFeatureDim);
    EXPECT_EQ(f1[i].source, kAllSources[i % 4]);
  }
  for (std::size_t t = 0; t < data.size(); ++t) {
    std::array<Tensor<float>, 3> branch;
    for (std::size_t k = 0; k < 3; ++k) {
      branch[k] = Tensor<float>({1, kFeatureDim}, f1[4 * t + k].values);
    }
    const auto combined = model.combiner().infer(branch[0], branch[1], branch[2]);
    EXPECT_EQ(combined.storage(), f1[4 * t + 3].values);
  }
}

}  // namespace
}  // namespace asc::encoder
