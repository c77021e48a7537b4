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
#include <random>
#include <vector>

#include "asc/nn/adam.hpp"
#include "asc/nn/gradcheck.hpp"
#include "asc/nn/layers.hpp"
#include "asc/nn/loss.hpp"
#include "asc/nn/sequential.hpp"

namespace asc::nn {
namespace {

template <typename T>
Tensor<T> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0,
                        double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

double weighted_sum(const Tensor<double>& y, const Tensor<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

// Checks input and parameter gradients of `layer` for the scalar loss
// sum(r * layer(x)), with r a fixed random upstream gradient.
double layer_grad_error(Layer<double>& layer, Tensor<double> x, Mode mode,
                        std::mt19937_64& rng) {
  const Tensor<double> probe = layer.forward(x, mode);
  const Tensor<double> upstream = random_tensor<double>(probe.shape(), rng);
  for (auto* p : layer.parameters()) p->grad.fill(0.0);
  layer.forward(x, mode);
  const Tensor<double> grad_x = layer.backward(upstream);

  auto loss = [&] { return weighted_sum(layer.forward(x, mode), upstream); };
  double worst = max_relative_error<double>(x.values(), grad_x.values(), loss);
  for (auto* p : layer.parameters()) {
    const Tensor<double> analytic = p->grad;
    worst = std::max(worst, max_relative_error<double>(
                                p->value.values(), analytic.values(), loss));
  }
  return worst;
}

TEST(LayerGradientTest, Conv2D) {
  std::mt19937_64 rng(1);
  Conv2D<double> conv(3, 2, 3, 5, rng);
  EXPECT_LT(layer_grad_error(conv, random_tensor<double>({2, 3, 5, 5}, rng),
                             Mode::kTrain, rng),
            1e-3);
}

TEST(LayerGradientTest, BatchNormTrainAndEval) {
  std::mt19937_64 rng(2);
  BatchNorm<double> bn(3);
  for (auto& v : bn.gamma().value.values()) v = 0.5 + rng() % 100 / 100.0;
  for (auto& v : bn.beta().value.values()) v = rng() % 100 / 100.0 - 0.5;
  const auto x = random_tensor<double>({3, 3, 4, 5}, rng);
  EXPECT_LT(layer_grad_error(bn, x, Mode::kTrain, rng), 1e-3);
  EXPECT_LT(layer_grad_error(bn, x, Mode::kEval, rng), 1e-3);
  const auto v = random_tensor<double>({4, 5}, rng);
  BatchNorm<double> bn1d(5);
  EXPECT_LT(layer_grad_error(bn1d, v, Mode::kTrain, rng), 1e-3);
}

TEST(LayerGradientTest, ReLUAwayFromKink) {
  std::mt19937_64 rng(3);
  auto x = random_tensor<double>({2, 3, 5, 5}, rng);
  for (auto& v : x.values()) v += v >= 0 ? 0.05 : -0.05;
  ReLU<double> relu;
  EXPECT_LT(layer_grad_error(relu, x, Mode::kTrain, rng), 1e-3);
}

TEST(LayerGradientTest, PoolingLayers) {
  std::mt19937_64 rng(4);
  AvgPool2x2<double> pool;
  EXPECT_LT(layer_grad_error(pool, random_tensor<double>({2, 3, 4, 5}, rng),
                             Mode::kTrain, rng),
            1e-3);
  GlobalAvgPool<double> gap;
  EXPECT_LT(layer_grad_error(gap, random_tensor<double>({2, 3, 5, 5}, rng),
                             Mode::kTrain, rng),
            1e-3);
}

TEST(LayerGradientTest, DenseAndSoftmax) {
  std::mt19937_64 rng(5);
  Dense<double> dense(5, 4, rng);
  EXPECT_LT(layer_grad_error(dense, random_tensor<double>({3, 5}, rng),
                             Mode::kTrain, rng),
            1e-3);
  Softmax<double> softmax;
  EXPECT_LT(layer_grad_error(softmax, random_tensor<double>({3, 5}, rng),
                             Mode::kTrain, rng),
            1e-3);
}

TEST(LayerGradientTest, DropoutWithFixedMask) {
  std::mt19937_64 rng(6);
  auto x = random_tensor<double>({4, 5}, rng);
  const auto upstream = random_tensor<double>({4, 5}, rng);
  Dropout<double> analytic_layer(0.3, 99);
  analytic_layer.forward(x, Mode::kTrain);
  const auto grad = analytic_layer.backward(upstream);
  auto loss = [&] {
    Dropout<double> d(0.3, 99);
    return weighted_sum(d.forward(x, Mode::kTrain), upstream);
  };
  EXPECT_LT(max_relative_error<double>(x.values(), grad.values(), loss), 1e-3);
}

TEST(LayerGradientTest, SoftmaxCrossEntropyComposite) {
  std::mt19937_64 rng(7);
  auto logits = random_tensor<double>({4, 5}, rng, -2, 2);
  Tensor<double> targets({4, 5});
  for (std::size_t r = 0; r < 4; ++r) {
    targets[r * 5 + r] = 0.7;
    targets[r * 5 + (r + 2) % 5] = 0.3;
  }
  const auto result = softmax_cross_entropy(logits, targets, 1e-10);
  auto loss = [&] {
    return cross_entropy(softmax_rows(logits), targets, 1e-10);
  };
  EXPECT_LT(max_relative_error<double>(logits.values(),
                                       result.grad_logits.values(), loss),
            1e-3);
}

TEST(LayerGradientTest, ZeroUpstreamGivesZeroParameterGradients) {
  std::mt19937_64 rng(8);
  Conv2D<double> conv(2, 3, 3, 3, rng);
  conv.forward(random_tensor<double>({2, 2, 4, 4}, rng), Mode::kTrain);
  conv.backward(Tensor<double>({2, 3, 4, 4}));
  for (auto* p : conv.parameters()) {
    for (double g : p->grad.values()) EXPECT_EQ(g, 0.0);
  }
}

TEST(LayerTest, BackwardWithoutForwardThrows) {
  std::mt19937_64 rng(9);
  Dense<float> dense(3, 2, rng);
  EXPECT_THROW(dense.backward(Tensor<float>({1, 2})), std::logic_error);
  ReLU<float> relu;
  EXPECT_THROW(relu.backward(Tensor<float>({1, 2})), std::logic_error);
}

TEST(LayerTest, ReluZerosNegativesAndTheirGradient) {
  ReLU<float> relu;
  Tensor<float> x({1, 4}, std::vector<float>{-1.0f, -2.0f, -0.5f, -3.0f});
  const auto y = relu.forward(x, Mode::kTrain);
  for (float v : y.values()) EXPECT_EQ(v, 0.0f);
  const auto g = relu.backward(Tensor<float>({1, 4}, 1.0f));
  for (float v : g.values()) EXPECT_EQ(v, 0.0f);
}

TEST(LayerTest, SoftmaxRowsNormalizedAndShiftInvariant) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    auto logits = random_tensor<float>({3, 10}, rng, -20, 20);
    const auto p = softmax_rows(logits);
    auto shifted = logits;
    for (auto& v : shifted.values()) v += 7.5f;
    const auto q = softmax_rows(shifted);
    for (std::size_t r = 0; r < 3; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 10; ++c) {
        s += p[r * 10 + c];
        EXPECT_NEAR(p[r * 10 + c], q[r * 10 + c], 1e-5);
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST(LayerTest, BatchNormTrainOutputIsStandardized) {
  std::mt19937_64 rng(11);
  BatchNorm<float> bn(4);
  auto x = random_tensor<float>({8, 4, 6, 6}, rng, 2.0, 9.0);
  const auto y = bn.forward(x, Mode::kTrain);
  for (std::size_t c = 0; c < 4; ++c) {
    double mean = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < 8; ++n) {
      for (std::size_t s = 0; s < 36; ++s) {
        const double v = y[(n * 4 + c) * 36 + s];
        mean += v;
        sq += v * v;
        ++count;
      }
    }
    mean /= count;
    EXPECT_NEAR(mean, 0.0, 1e-3);
    EXPECT_NEAR(sq / count - mean * mean, 1.0, 1e-3);
  }
  // Running statistics moved towards the batch statistics.
  EXPECT_GT(bn.running_mean()[0], 0.0f);
}

TEST(LayerTest, BatchNormEvalUsesRunningStatistics) {
  BatchNorm<float> bn(1);
  Tensor<float> x({2, 1}, std::vector<float>{3.0f, 5.0f});
  // Fresh running stats are mean 0 / var 1: eval is (almost) the identity.
  const auto y = bn.infer(x);
  EXPECT_NEAR(y[0], 3.0f, 1e-4);
  EXPECT_NEAR(y[1], 5.0f, 1e-4);
}

TEST(LayerTest, DropoutRateAndScaling) {
  Dropout<float> drop(0.3, 42);
  Tensor<float> x({100, 100}, 1.0f);
  const auto y = drop.forward(x, Mode::kTrain);
  std::size_t zeros = 0;
  for (float v : y.values()) {
    if (v == 0.0f) {
      ++zeros;
    } else {
      EXPECT_FLOAT_EQ(v, 1.0f / 0.7f);
    }
  }
  // Binomial(10000, 0.3): sd ~ 46; allow 5 sd.
  EXPECT_NEAR(static_cast<double>(zeros), 3000.0, 230.0);
  EXPECT_EQ(drop.forward(x, Mode::kEval), x);
  EXPECT_EQ(drop.infer(x), x);
  EXPECT_THROW(Dropout<float>(1.0, 1), std::invalid_argument);
}

TEST(SequentialTest, ShapeMismatchNamesTheLayer) {
  EXPECT_THROW(
      {
        try {
          Sequential<float> net({4}, {LayerSpec::dense(3), LayerSpec::conv(3, 2)},
                                1);
        } catch (const std::invalid_argument& e) {
          EXPECT_NE(std::string(e.what()).find("layer 1 (conv2d)"),
                    std::string::npos)
              << e.what();
          throw;
        }
      },
      std::invalid_argument);
  Sequential<float> net({4}, {LayerSpec::dense(3)}, 1);
  EXPECT_THROW(net.forward(Tensor<float>({2, 5}), Mode::kEval),
               std::invalid_argument);
  EXPECT_THROW(Sequential<float>({1, 8, 8}, {LayerSpec::conv(4, 2)}, 1),
               std::invalid_argument);  // even kernel
}

TEST(SequentialTest, InferMatchesEvalForward) {
  std::mt19937_64 rng(12);
  Sequential<float> net({2, 8, 8},
                        {LayerSpec::batch_norm(), LayerSpec::conv(3, 4),
                         LayerSpec::relu(), LayerSpec::avg_pool(),
                         LayerSpec::dropout(0.2), LayerSpec::global_avg_pool(),
                         LayerSpec::dense(3), LayerSpec::softmax()},
                        5);
  const auto x = random_tensor<float>({3, 2, 8, 8}, rng);
  EXPECT_EQ(net.infer(x), net.forward(x, Mode::kEval));
  EXPECT_EQ(net.output_shape(), Shape{3});
  const auto params = net.parameters();
  ASSERT_FALSE(params.empty());
  EXPECT_EQ(params[0]->name, "0.gamma");
}

TEST(LossTest, DirectSubstitutionExamples) {
  Tensor<double> onehot({1, 3}, std::vector<double>{0, 1, 0});
  EXPECT_DOUBLE_EQ(cross_entropy(onehot, onehot, 1e-10), 0.0);

  Tensor<double> uniform({1, 10}, 0.1);
  Tensor<double> target({1, 10});
  target[3] = 1.0;
  EXPECT_NEAR(cross_entropy(uniform, target, 1e-10), std::log(10.0), 1e-12);
  EXPECT_NEAR(cross_entropy(uniform, target, 1e-10), 2.3026, 1e-4);

  Parameter<double> theta("theta", Tensor<double>({1}, 2.0));
  std::vector<Parameter<double>*> params = {&theta};
  LossConfig cfg;
  cfg.l2_lambda = 1e-4;
  EXPECT_NEAR(cross_entropy_l2(onehot, onehot, params, cfg), 2e-4,
              1e-12);
}

TEST(LossTest, RejectsNaNAndUnnormalizedRows) {
  Tensor<double> bad({1, 2}, std::vector<double>{std::nan(""), 1.0});
  Tensor<double> target({1, 2}, std::vector<double>{1.0, 0.0});
  EXPECT_THROW(cross_entropy(bad, target, 1e-10), std::invalid_argument);
  Tensor<double> unnormalized({1, 2}, std::vector<double>{0.7, 0.7});
  EXPECT_THROW(cross_entropy(unnormalized, target, 1e-10),
               std::invalid_argument);
  Tensor<double> zero_prob({1, 2}, std::vector<double>{0.0, 1.0});
  EXPECT_NEAR(cross_entropy(zero_prob, target, 1e-10), -std::log(1e-10),
              1e-9);
}

TEST(AdamTest, FirstStepMovesByLearningRateAgainstGradientSign) {
  for (double g : {0.37, -5.0, 1e-3}) {
    Parameter<double> p("p", Tensor<double>({1}, 1.0));
    p.grad[0] = g;
    std::vector<Parameter<double>*> params = {&p};
    Adam<double> adam;
    adam.step(params);
    EXPECT_NEAR(p.value[0], 1.0 - 1e-4 * (g > 0 ? 1 : -1), 1e-9);
    EXPECT_EQ(adam.steps(), 1u);
  }
}

TEST(AdamTest, ZeroGradientLeavesParametersUnchanged) {
  Parameter<float> p("p", Tensor<float>({3}, 0.25f));
  std::vector<Parameter<float>*> params = {&p};
  Adam<float> adam;
  for (int i = 0; i < 50; ++i) adam.step(params);
  for (float v : p.value.values()) EXPECT_EQ(v, 0.25f);
}

TEST(AdamTest, IdenticalRunsAreBitIdentical) {
  auto run = [] {
    std::mt19937_64 rng(3);
    Sequential<float> net({6}, {LayerSpec::dense(8), LayerSpec::relu(),
                                LayerSpec::dropout(0.25), LayerSpec::dense(3)},
                          17);
    Adam<float> adam;
    const auto x = random_tensor<float>({5, 6}, rng);
    Tensor<float> y({5, 3});
    for (std::size_t r = 0; r < 5; ++r) y[r * 3 + r % 3] = 1.0f;
    for (int step = 0; step < 20; ++step) {
      net.zero_grad();
      const auto res =
          softmax_cross_entropy(net.forward(x, Mode::kTrain), y, 1e-10);
      net.backward(res.grad_logits);
      auto params = net.parameters();
      add_l2_gradient<float>(params, 1e-4);
      adam.step(params);
    }
    std::vector<float> flat;
    for (auto* p : net.parameters()) {
      flat.insert(flat.end(), p->value.values().begin(),
                  p->value.values().end());
    }
    return flat;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace asc::nn
