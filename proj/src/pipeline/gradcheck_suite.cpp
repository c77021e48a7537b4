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

#include "asc/pipeline/gradcheck_suite.hpp"

#include <algorithm>
#include <random>

#include "asc/decoders/moe.hpp"
#include "asc/encoder/combiner.hpp"
#include "asc/encoder/encoder.hpp"
#include "asc/nn/gradcheck.hpp"
#include "asc/nn/layers.hpp"
#include "asc/nn/loss.hpp"

namespace asc::pipeline {
namespace {

using nn::Mode;
using nn::Tensor;
using D = double;

Tensor<D> random_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1.0,
                        double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<D> t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

// Pushes values at least `gap` away from zero so a step of h cannot cross a
// ReLU kink.
void away_from_zero(Tensor<D>& t, double gap) {
  for (auto& v : t.values()) v += v >= 0 ? gap : -gap;
}

double dot(const Tensor<D>& a, const Tensor<D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Check {
  double worst = 0.0;
  std::size_t entries = 0;

  template <typename Loss>
  void run(std::span<D> values, std::span<const D> analytic, Loss&& loss) {
    worst = std::max(worst, nn::max_relative_error<D>(values, analytic, loss));
    entries += values.size();
  }
};

// Input and parameter gradients of sum(r * layer(x)) for a fixed random r.
GradCheckResult check_layer(const std::string& name, nn::Layer<D>& layer,
                            Tensor<D> x, Mode mode, std::mt19937_64& rng) {
  const Tensor<D> upstream = random_tensor(layer.forward(x, mode).shape(), rng);
  for (auto* p : layer.parameters()) p->grad.fill(0.0);
  layer.forward(x, mode);
  const Tensor<D> grad_x = layer.backward(upstream);
  auto loss = [&] { return dot(layer.forward(x, mode), upstream); };
  Check c;
  c.run(x.values(), grad_x.values(), loss);
  for (auto* p : layer.parameters()) {
    const Tensor<D> analytic = p->grad;
    c.run(p->value.values(), analytic.values(), loss);
  }
  return {name, c.worst, c.entries};
}

}  // namespace

std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckResult> out;

  {
    nn::Conv2D<D> conv(3, 2, 3, 3, rng);
    out.push_back(check_layer("conv2d", conv, random_tensor({2, 3, 5, 5}, rng),
                              Mode::kTrain, rng));
  }
  {
    nn::BatchNorm<D> bn(3);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto& v : bn.gamma().value.values()) v = u(rng);
    for (auto& v : bn.beta().value.values()) v = u(rng) - 1.0;
    const auto x = random_tensor({3, 3, 5, 5}, rng);
    out.push_back(check_layer("batchnorm_train", bn, x, Mode::kTrain, rng));
    out.push_back(check_layer("batchnorm_eval", bn, x, Mode::kEval, rng));
  }
  {
    auto x = random_tensor({2, 3, 5, 5}, rng);
    away_from_zero(x, 0.05);
    nn::ReLU<D> relu;
    out.push_back(check_layer("relu", relu, x, Mode::kTrain, rng));
  }
  {
    nn::AvgPool2x2<D> pool;
    out.push_back(check_layer("avgpool2x2", pool, random_tensor({2, 3, 4, 4}, rng),
                              Mode::kTrain, rng));
    nn::GlobalAvgPool<D> gap;
    out.push_back(check_layer("global_avgpool", gap, random_tensor({2, 3, 5, 5}, rng),
                              Mode::kTrain, rng));
  }
  {
    nn::Dense<D> dense(5, 4, rng);
    out.push_back(check_layer("dense", dense, random_tensor({3, 5}, rng), Mode::kTrain, rng));
    nn::Softmax<D> softmax;
    out.push_back(check_layer("softmax", softmax, random_tensor({3, 5}, rng, -2, 2),
                              Mode::kTrain, rng));
  }
  {
    // The mask depends only on the seed, so each loss evaluation rebuilds it.
    auto x = random_tensor({4, 5}, rng);
    const auto upstream = random_tensor({4, 5}, rng);
    nn::Dropout<D> layer(0.3, seed);
    layer.forward(x, Mode::kTrain);
    const auto grad = layer.backward(upstream);
    auto loss = [&] {
      nn::Dropout<D> d(0.3, seed);
      return dot(d.forward(x, Mode::kTrain), upstream);
    };
    Check c;
    c.run(x.values(), grad.values(), loss);
    out.push_back({"dropout", c.worst, c.entries});
  }
  {
    auto logits = random_tensor({4, 5}, rng, -2, 2);
    Tensor<D> targets({4, 5});
    for (std::size_t r = 0; r < 4; ++r) {
      targets[r * 5 + r] = 0.6;
      targets[r * 5 + (r + 3) % 5] = 0.4;
    }
    const auto res = nn::softmax_cross_entropy(logits, targets, 1e-10);
    auto loss = [&] { return nn::cross_entropy(nn::softmax_rows(logits), targets, 1e-10); };
    Check c;
    c.run(logits.values(), res.grad_logits.values(), loss);
    out.push_back({"softmax_cross_entropy", c.worst, c.entries});
  }
  {
    nn::Dense<D> dense(5, 3, rng);
    auto params = dense.parameters();
    for (auto* p : params) p->grad.fill(0.0);
    nn::add_l2_gradient(params, 0.1);
    Check c;
    for (auto* p : params) {
      const Tensor<D> analytic = p->grad;
      c.run(p->value.values(), analytic.values(), [&] { return nn::l2_penalty(params, 0.1); });
    }
    out.push_back({"l2_penalty", c.worst, c.entries});
  }
  {
    // LinComb inside the encoder objective: three branch features feed their
    // own Dense heads and the combiner, whose output feeds a Dense head.
    const std::size_t dim = 5, classes = 3, batch = 3;
    encoder::Combiner<D> comb(encoder::CombinerKind::kLin, dim);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    for (auto* p : comb.parameters()) {
      for (auto& v : p->value.values()) v += jitter(rng);
    }
    std::array<Tensor<D>, 3> feats;
    for (auto& f : feats) f = random_tensor({batch, dim}, rng);
    // Keep the combiner's pre-activation clear of zero.
    {
      const auto pre = comb.infer(feats[0], feats[1], feats[2]);
      auto& bias = comb.parameters()[3]->value;
      for (std::size_t d = 0; d < dim; ++d) {
        double lo = 1e9;
        for (std::size_t n = 0; n < batch; ++n) lo = std::min(lo, pre[n * dim + d]);
        if (lo < 0.1) bias[d] += 0.1 - lo + 0.2;
      }
    }
    std::array<nn::Dense<D>, 4> heads = {nn::Dense<D>(dim, classes, rng),
                                         nn::Dense<D>(dim, classes, rng),
                                         nn::Dense<D>(dim, classes, rng),
                                         nn::Dense<D>(dim, classes, rng)};
    Tensor<D> y({batch, classes});
    y[0] = 1.0, y[4] = 0.7, y[5] = 0.3, y[6] = 0.5, y[8] = 0.5;
    encoder::EncoderLossConfig cfg;
    nn::LossConfig reg;
    std::vector<nn::Parameter<D>*> params = comb.parameters();
    auto objective = [&](bool backprop) {
      encoder::EncoderOutput<D> o;
      const auto combined = comb.forward(feats[0], feats[1], feats[2]);
      for (std::size_t b = 0; b < 3; ++b) {
        o.features[b] = feats[b];
        o.logits[b] = heads[b].forward(feats[b], Mode::kTrain);
      }
      o.features[3] = combined;
      o.logits[3] = heads[3].forward(combined, Mode::kTrain);
      auto res = encoder::encoder_loss(o, y, cfg, reg, params);
      if (backprop) {
        for (auto* p : params) p->grad.fill(0.0);
        for (std::size_t b = 0; b < 3; ++b) heads[b].backward(res.grad_logits[b]);
        comb.backward(heads[3].backward(res.grad_logits[3]));
        nn::add_l2_gradient(params, reg.l2_lambda);
      }
      return res.report.total;
    };
    objective(true);
    Check c;
    for (auto* p : params) {
      const Tensor<D> analytic = p->grad;
      c.run(p->value.values(), analytic.values(), [&] { return objective(false); });
    }
    out.push_back({"lincomb_encoder_loss", c.worst, c.entries});
  }
  {
    encoder::Combiner<D> sum(encoder::CombinerKind::kSum, 5);
    encoder::Combiner<D> max(encoder::CombinerKind::kMax, 5);
    for (auto* comb : {&sum, &max}) {
      std::array<Tensor<D>, 3> x;
      for (auto& t : x) t = random_tensor({3, 5}, rng);
      const auto upstream = random_tensor({3, 5}, rng);
      comb->forward(x[0], x[1], x[2]);
      const auto grads = comb->backward(upstream);
      auto loss = [&] { return dot(comb->infer(x[0], x[1], x[2]), upstream); };
      Check c;
      for (std::size_t b = 0; b < 3; ++b) c.run(x[b].values(), grads[b].values(), loss);
      out.push_back({comb == &sum ? "sumcomb_inputs" : "maxcomb_inputs", c.worst, c.entries});
    }
  }
  {
    decoders::MoELayer<D> moe(5, 3, 4, rng);
    auto x = random_tensor({3, 5}, rng);
    // Expert outputs pass a ReLU; raise the expert biases until every unit
    // is active and clear of the kink.
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto e = moe.experts(x);
      if (*std::min_element(e.values().begin(), e.values().end()) >= 0.05) break;
      for (auto& v : moe.parameters()[1]->value.values()) v += 0.1;
    }
    out.push_back(check_layer("moe", moe, x, Mode::kTrain, rng));
  }
  return out;
}

}  // namespace asc::pipeline
