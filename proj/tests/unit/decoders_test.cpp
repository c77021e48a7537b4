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

#include "asc/decoders/decoder.hpp"
#include "asc/nn/gradcheck.hpp"

namespace asc::decoders {
namespace {

using nn::Tensor;

// Two Gaussian blobs per class centred on +-2 along class-specific
// coordinates.
augment::LabeledSet blobs(std::size_t per_class, std::size_t dim,
                          std::size_t classes, std::uint64_t seed,
                          float shift = 2.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.5f);
  augment::LabeledSet s;
  s.item_size = dim;
  s.n_classes = classes;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        s.x.push_back(noise(rng) + (d % classes == c ? shift : 0.0f));
      }
      for (std::size_t k = 0; k < classes; ++k) s.y.push_back(k == c ? 1.0f : 0.0f);
    }
  }
  return s;
}

std::vector<float> random_rows(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<float> d(0.0f, 1.5f);
  std::vector<float> x(n * dim);
  for (auto& v : x) v = d(rng);
  return x;
}

TEST(ForestTest, ConstantLabelsPredictThatClass) {
  auto data = blobs(10, 8, 2, 1);
  for (std::size_t r = 0; r < data.size(); ++r) {
    data.y[r * 2] = 0.0f;
    data.y[r * 2 + 1] = 1.0f;
  }
  DecoderOptions o;
  o.input_dim = 8;
  o.n_classes = 2;
  o.forest.n_trees = 10;
  RfrDecoder rfr(o);
  DecoderTrainConfig t;
  rfr.fit(data, t);
  std::mt19937_64 rng(2);
  const auto scores = rfr.predict(random_rows(30, 8, rng));
  for (std::size_t c : argmax_rows(scores, 2)) EXPECT_EQ(c, 1u);
}

TEST(ForestTest, UnboundedTreeReproducesTrainingLabels) {
  std::mt19937_64 rng(3);
  const std::size_t n = 10, dim = 6, c = 3;
  const auto x = random_rows(n, dim, rng);
  std::vector<float> y(n * c);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t r = 0; r < n; ++r) {
    float s = 0.0f;
    for (std::size_t k = 0; k < c; ++k) s += (y[r * c + k] = u(rng));
    for (std::size_t k = 0; k < c; ++k) y[r * c + k] /= s;
  }
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 1000;
  cfg.min_leaf = 1;
  cfg.mtry = dim;
  cfg.bootstrap = false;
  RandomForest forest(dim, c);
  forest.fit(x, y, cfg);
  for (std::size_t r = 0; r < n; ++r) {
    const auto p = forest.predict({x.data() + r * dim, dim});
    for (std::size_t k = 0; k < c; ++k) EXPECT_EQ(p[k], y[r * c + k]);
  }
  EXPECT_EQ(forest.trees()[0].leaf_count(), n);
}

TEST(ForestTest, SeedFixesForestAcrossThreadCounts) {
  const auto data = blobs(20, 16, 3, 4);
  ForestConfig cfg;
  cfg.n_trees = 12;
  cfg.seed = 9;
  RandomForest a(16, 3), b(16, 3), other(16, 3);
  a.fit(data.x, data.y, cfg);
  cfg.threads = 4;
  b.fit(data.x, data.y, cfg);
  ASSERT_EQ(a.trees().size(), b.trees().size());
  for (std::size_t t = 0; t < a.trees().size(); ++t) {
    EXPECT_TRUE(a.trees()[t] == b.trees()[t]);
  }
  cfg.seed = 10;
  other.fit(data.x, data.y, cfg);
  EXPECT_FALSE(a.trees()[0] == other.trees()[0]);
}

TEST(ForestTest, MeanPoolingOfTwoOpposedTrees) {
  RandomForest forest(2, 2);
  for (float v : {1.0f, 0.0f}) {
    RegressionTree t;
    t.n_outputs = 2;
    t.nodes.push_back({});
    t.nodes[0].leaf = 0;
    t.leaf_values = {v, 1.0f - v};
    forest.trees().push_back(t);
  }
  const std::vector<float> x = {0.3f, -1.0f};
  EXPECT_EQ(forest.predict(x), (std::vector<float>{0.5f, 0.5f}));
}

TEST(ForestTest, PoolingMatchesBruteForceAndIsOrderInvariant) {
  const auto data = blobs(15, 10, 3, 5);
  ForestConfig cfg;
  cfg.n_trees = 25;
  cfg.mtry = 3;
  RandomForest forest(10, 3);
  forest.fit(data.x, data.y, cfg);
  RandomForest reversed = forest;
  std::reverse(reversed.trees().begin(), reversed.trees().end());
  std::mt19937_64 rng(6);
  const auto x = random_rows(20, 10, rng);
  for (std::size_t r = 0; r < 20; ++r) {
    std::span<const float> row(x.data() + r * 10, 10);
    std::vector<double> brute(3, 0.0);
    for (const auto& t : forest.trees()) {
      const auto leaf = t.predict(row);
      for (std::size_t k = 0; k < 3; ++k) brute[k] += leaf[k];
    }
    const auto p = forest.predict(row);
    const auto q = reversed.predict(row);
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(p[k], brute[k] / 25.0, 1e-6);
      EXPECT_NEAR(p[k], q[k], 1e-6);
      EXPECT_GE(p[k], 0.0f);
      EXPECT_LE(p[k], 1.0f);
      sum += p[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-5);
  }
}

TEST(ForestTest, DepthAndLeafBounds) {
  const auto data = blobs(40, 8, 2, 7);
  ForestConfig cfg;
  cfg.n_trees = 5;
  cfg.max_depth = 3;
  RandomForest forest(8, 2);
  forest.fit(data.x, data.y, cfg);
  for (const auto& t : forest.trees()) {
    EXPECT_LE(t.depth(), 3u);
    for (float v : t.leaf_values) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(ForestTest, Errors) {
  RandomForest forest(4, 2);
  ForestConfig cfg;
  std::vector<float> x(4), y(2);
  EXPECT_THROW(forest.fit(x, y, cfg), std::invalid_argument);  // one row
  cfg.n_trees = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(forest.predict(std::vector<float>(4)), std::logic_error);
}

TEST(NeuralDecoderTest, Dnn03ParameterShapes) {
  DecoderOptions o;
  o.n_classes = 4;
  NeuralDecoder dnn(DecoderKind::kDnn, o);
  std::vector<nn::Shape> weights;
  for (auto* p : dnn.network().parameters()) {
    if (p->value.rank() == 2) weights.push_back(p->value.shape());
  }
  EXPECT_EQ(weights, (std::vector<nn::Shape>{
                         {256, 512}, {512, 1024}, {1024, 1024}, {1024, 4}}));
  EXPECT_TRUE(dnn.deviation_flags().empty());
}

TEST(NeuralDecoderTest, MoeStructure) {
  DecoderOptions o;
  o.n_classes = 3;
  o.n_experts = 10;
  NeuralDecoder moe(DecoderKind::kMoe, o);
  ASSERT_NE(moe.moe(), nullptr);
  std::mt19937_64 rng(8);
  const auto x = random_rows(5, 256, rng);
  const auto h = moe.moe_input(x);
  EXPECT_EQ(h.shape(), (nn::Shape{5, 256}));
  EXPECT_EQ(moe.moe()->gate(h).shape(), (nn::Shape{5, 10}));
  EXPECT_FALSE(moe.deviation_flags().empty());
}

TEST(MoELayerTest, SingleExpertGateIsOne) {
  std::mt19937_64 rng(9);
  MoELayer<double> moe(4, 3, 1, rng);
  Tensor<double> x({2, 4});
  for (auto& v : x.values()) v = std::normal_distribution<double>()(rng);
  const auto g = moe.gate(x);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], 1.0);
  const auto e = moe.experts(x);
  const auto s = moe.infer(x);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], e[i]);
}

TEST(MoELayerTest, SymmetricTwoExpertExample) {
  std::mt19937_64 rng(10);
  MoELayer<double> moe(1, 2, 2, rng);
  moe.expert_weight().value.fill(0.0);
  moe.gate_weight().value.fill(0.0);
  moe.expert_bias().value.storage() = {2, 0, 0, 2};
  Tensor<double> x({1, 1}, std::vector<double>{0.7});
  const auto s = moe.infer(x);
  EXPECT_EQ(s.storage(), (std::vector<double>{1, 1}));
  const auto p = nn::softmax_rows(s);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(MoELayerTest, GateNormalizationAndConvexEnvelope) {
  std::mt19937_64 rng(11);
  MoELayer<float> moe(8, 4, 6, rng);
  std::normal_distribution<float> d(0.0f, 2.0f);
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor<float> x({1, 8});
    for (auto& v : x.values()) v = d(rng);
    const auto g = moe.gate(x);
    double sum = 0.0;
    for (float v : g.values()) {
      ASSERT_GE(v, 0.0f);
      sum += v;
    }
    ASSERT_NEAR(sum, 1.0, 1e-6);
    const auto e = moe.experts(x);
    const auto s = moe.infer(x);
    for (std::size_t c = 0; c < 4; ++c) {
      float lo = e[c], hi = e[c];
      for (std::size_t k = 1; k < 6; ++k) {
        lo = std::min(lo, e[k * 4 + c]);
        hi = std::max(hi, e[k * 4 + c]);
      }
      ASSERT_GE(s[c], lo - 1e-5f);
      ASSERT_LE(s[c], hi + 1e-5f);
    }
  }
}

TEST(MoELayerTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  MoELayer<double> moe(5, 3, 4, rng);
  // Positive expert biases keep every expert ReLU away from its kink.
  moe.expert_bias().value.fill(3.0);
  Tensor<double> x({3, 5});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x.values()) v = u(rng);
  Tensor<double> r({3, 3});
  for (auto& v : r.values()) v = u(rng);
  auto loss = [&] {
    const auto y = moe.forward(x, nn::Mode::kTrain);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
  };
  moe.forward(x, nn::Mode::kTrain);
  for (auto* p : moe.parameters()) p->grad.fill(0.0);
  const auto dx = moe.backward(r);
  double worst = nn::max_relative_error<double>(x.values(), dx.values(), loss);
  for (auto* p : moe.parameters()) {
    const Tensor<double> analytic = p->grad;
    worst = std::max(worst, nn::max_relative_error<double>(
                                p->value.values(), analytic.values(), loss));
  }
  EXPECT_LT(worst, 1e-3);
}

class NeuralTraining : public ::testing::TestWithParam<DecoderKind> {};

TEST_P(NeuralTraining, LossDecreasesOnSeparableFeatures) {
  const auto data = blobs(30, 256, 2, 13, 0.3f);
  DecoderOptions o;
  o.n_classes = 2;
  o.seed = 3;
  auto dec = make_decoder(GetParam(), o);
  DecoderTrainConfig t;
  t.epochs = 5;
  t.batch_size = 20;
  t.learning_rate = 1e-4;
  t.seed = 4;
  const auto log = dec->fit(data, t);
  ASSERT_EQ(log.size(), 5u);
  for (std::size_t e = 1; e < log.size(); ++e) {
    EXPECT_LT(log[e], log[e - 1]) << "epoch " << e + 1;
  }
  const auto scores = dec->predict(data.x);
  const auto cls = argmax_rows(scores, 2);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < cls.size(); ++r) correct += data.y[r * 2 + cls[r]] == 1.0f;
  EXPECT_GE(correct, cls.size() * 9 / 10);
}

INSTANTIATE_TEST_SUITE_P(Kinds, NeuralTraining,
                         ::testing::Values(DecoderKind::kDnn, DecoderKind::kMoe));

TEST(DecoderInterfaceTest, AllKindsShareShapesAndRejectBadInput) {
  DecoderOptions o;
  o.n_classes = 3;
  o.forest.n_trees = 5;
  const auto data = blobs(6, 256, 3, 14);
  DecoderTrainConfig t;
  t.epochs = 1;
  for (DecoderKind k : kAllDecoders) {
    auto dec = make_decoder(k, o);
    EXPECT_EQ(dec->kind(), k);
    dec->fit(data, t);
    EXPECT_EQ(dec->predict(data.x).size(), data.size() * 3);
    EXPECT_THROW(dec->predict(std::vector<float>(255)), std::invalid_argument);
    auto wrong = data;
    wrong.n_classes = 2;
    wrong.y.resize(wrong.size() * 2);
    EXPECT_THROW(dec->fit(wrong, t), std::invalid_argument);
  }
  EXPECT_EQ(decoder_kind_from_string("dnn-03"), DecoderKind::kDnn);
  EXPECT_THROW(decoder_kind_from_string("svm"), std::invalid_argument);
}

}  // namespace
}  // namespace asc::decoders
