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

#include "asc/decoders/decoder.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "asc/encoder/architecture.hpp"
#include "asc/nn/adam.hpp"

namespace asc::decoders {

using nn::Tensor;

std::string_view to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::kRfr: return "rfr";
    case DecoderKind::kDnn: return "dnn";
    case DecoderKind::kMoe: return "moe";
  }
  return "?";
}

DecoderKind decoder_kind_from_string(std::string_view name) {
  if (name == "rfr" || name == "forest") return DecoderKind::kRfr;
  if (name == "dnn" || name == "dnn03" || name == "dnn-03") {
    return DecoderKind::kDnn;
  }
  if (name == "moe") return DecoderKind::kMoe;
  throw std::invalid_argument("unknown decoder '" + std::string(name) +
                              "' (expected rfr, dnn or moe)");
}

void DecoderOptions::validate() const {
  if (input_dim == 0) throw std::invalid_argument("decoder: input_dim must be > 0");
  if (n_classes < 2) throw std::invalid_argument("decoder: n_classes must be >= 2");
  if (n_experts == 0) throw std::invalid_argument("decoder: n_experts must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("decoder: dropout must be in [0, 1)");
  }
  forest.validate();
}

void DecoderTrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("decoder: batch_size must be > 0");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("decoder: learning_rate must be > 0");
  }
  reg.validate();
  mixup.validate();
}

Decoder::Decoder(const DecoderOptions& opts) : opts_(opts) { opts_.validate(); }

void Decoder::check_rows(std::span<const float> x) const {
  if (x.size() % opts_.input_dim != 0) {
    throw std::invalid_argument("decoder: input length " +
                                std::to_string(x.size()) +
                                " is not a multiple of " +
                                std::to_string(opts_.input_dim));
  }
}

namespace {

void check_training_set(const augment::LabeledSet& data,
                        const DecoderOptions& opts) {
  if (data.item_size != opts.input_dim || data.n_classes != opts.n_classes) {
    throw std::invalid_argument(
        "decoder: training set is " + std::to_string(data.item_size) + "-d with " +
        std::to_string(data.n_classes) + " classes, decoder expects " +
        std::to_string(opts.input_dim) + "-d with " +
        std::to_string(opts.n_classes));
  }
  if (data.size() == 0) throw std::invalid_argument("decoder: empty training set");
}

augment::MixupConfig feature_mixup(const DecoderTrainConfig& cfg,
                                   std::uint64_t stream) {
  augment::MixupConfig m = cfg.mixup;
  m.stage = augment::MixupStage::kFeature;
  m.rng_seed = derive_seed(cfg.seed, stream);
  return m;
}

}  // namespace

// ------------------------------------------------------------------ RFR

RfrDecoder::RfrDecoder(const DecoderOptions& opts)
    : Decoder(opts), forest_(opts.input_dim, opts.n_classes) {}

std::vector<double> RfrDecoder::fit(const augment::LabeledSet& data,
                                    const DecoderTrainConfig& cfg) {
  cfg.validate();
  check_training_set(data, opts_);
  ForestConfig fc = opts_.forest;
  fc.seed = derive_seed(cfg.seed, 77);
  if (cfg.use_mixup) {
    const auto mixed = augment::augment_feature_set(data, feature_mixup(cfg, 1000));
    forest_.fit(mixed.x, mixed.y, fc);
  } else {
    forest_.fit(data.x, data.y, fc);
  }
  return {};
}

std::vector<float> RfrDecoder::predict(std::span<const float> x) const {
  check_rows(x);
  const std::size_t d = opts_.input_dim;
  const std::size_t n = x.size() / d;
  std::vector<float> out;
  out.reserve(n * opts_.n_classes);
  for (std::size_t r = 0; r < n; ++r) {
    const auto s = forest_.predict(x.subspan(r * d, d));
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

// --------------------------------------------------------------- neural

NeuralDecoder::NeuralDecoder(DecoderKind kind, const DecoderOptions& opts)
    : Decoder(opts), kind_(kind), net_({opts.input_dim}) {
  if (kind == DecoderKind::kRfr) {
    throw std::invalid_argument("NeuralDecoder: kind must be dnn or moe");
  }
  const std::uint64_t seed = derive_seed(opts_.seed, 40);
  const std::vector<std::size_t> trunk = {512, 1024, 1024};
  if (kind_ == DecoderKind::kDnn) {
    for (const auto& spec : encoder::dense_stack_specs(trunk, opts_.dropout,
                                                       opts_.n_classes)) {
      net_.add(spec, seed);
    }
    return;
  }
  for (const auto& spec : encoder::dense_stack_specs(trunk, opts_.dropout, 0)) {
    net_.add(spec, seed);
  }
  net_.add(nn::LayerSpec::dense(encoder::kFeatureDim), seed);
  std::mt19937_64 rng(derive_seed(seed, net_.size()));
  net_.add(std::make_unique<MoELayer<float>>(encoder::kFeatureDim,
                                             opts_.n_classes, opts_.n_experts,
                                             rng));
}

std::vector<std::string> NeuralDecoder::deviation_flags() const {
  if (kind_ != DecoderKind::kMoe) return {};
  return {"moe_projection_1024_to_256", "moe_gate_input_projected_256"};
}

const MoELayer<float>* NeuralDecoder::moe() const {
  if (kind_ != DecoderKind::kMoe) return nullptr;
  return dynamic_cast<const MoELayer<float>*>(&net_.layer(net_.size() - 1));
}

Tensor<float> NeuralDecoder::moe_input(std::span<const float> x) const {
  if (kind_ != DecoderKind::kMoe) {
    throw std::logic_error("moe_input: not an MoE decoder");
  }
  check_rows(x);
  const std::size_t n = x.size() / opts_.input_dim;
  Tensor<float> h({n, opts_.input_dim}, std::vector<float>(x.begin(), x.end()));
  for (std::size_t i = 0; i + 1 < net_.size(); ++i) h = net_.layer(i).infer(h);
  return h;
}

std::vector<double> NeuralDecoder::fit(const augment::LabeledSet& data,
                                       const DecoderTrainConfig& cfg) {
  cfg.validate();
  check_training_set(data, opts_);
  const std::size_t d = opts_.input_dim;
  const std::size_t c = opts_.n_classes;
  const std::size_t n = data.size();
  nn::Adam<float> adam({cfg.learning_rate});
  auto params = net_.parameters();
  std::vector<double> log;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    augment::MixupPlan plan;
    if (cfg.use_mixup) {
      plan = augment::plan_feature_mixup(n, feature_mixup(cfg, 1000 + epoch));
    } else {
      for (std::size_t i = 0; i < n; ++i) plan.entries.push_back({i, i});
    }
    std::mt19937_64 order(derive_seed(cfg.seed, 2000 + epoch));
    std::shuffle(plan.entries.begin(), plan.entries.end(), order);
    double total = 0.0;
    for (std::size_t s = 0; s < plan.entries.size(); s += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, plan.entries.size() - s);
      Tensor<float> x({b, d});
      Tensor<float> y({b, c});
      for (std::size_t r = 0; r < b; ++r) {
        const auto& e = plan.entries[s + r];
        augment::mixup_pair({data.x.data() + e.first * d, d},
                            {data.x.data() + e.second * d, d},
                            {data.y.data() + e.first * c, c},
                            {data.y.data() + e.second * c, c}, e.lambda,
                            {x.data() + r * d, d}, {y.data() + r * c, c});
      }
      net_.zero_grad();
      const auto logits = net_.forward(x, nn::Mode::kTrain);
      const auto sce = nn::softmax_cross_entropy(logits, y, cfg.reg.log_floor);
      net_.backward(sce.grad_logits);
      nn::add_l2_gradient(params, cfg.reg.l2_lambda);
      adam.step(params);
      total += static_cast<double>(b) *
               (sce.loss + nn::l2_penalty(params, cfg.reg.l2_lambda));
    }
    log.push_back(total / static_cast<double>(plan.entries.size()));
    if (cfg.on_epoch) cfg.on_epoch(epoch, log.back());
  }
  return log;
}

std::vector<float> NeuralDecoder::predict(std::span<const float> x) const {
  check_rows(x);
  const std::size_t n = x.size() / opts_.input_dim;
  if (n == 0) return {};
  Tensor<float> in({n, opts_.input_dim}, std::vector<float>(x.begin(), x.end()));
  return nn::softmax_rows(net_.infer(in)).storage();
}

std::unique_ptr<Decoder> make_decoder(DecoderKind kind,
                                      const DecoderOptions& opts) {
  if (kind == DecoderKind::kRfr) return std::make_unique<RfrDecoder>(opts);
  return std::make_unique<NeuralDecoder>(kind, opts);
}

std::vector<std::size_t> argmax_rows(std::span<const float> scores,
                                     std::size_t n_classes) {
  if (n_classes == 0 || scores.size() % n_classes != 0) {
    throw std::invalid_argument("argmax_rows: bad score length");
  }
  std::vector<std::size_t> out(scores.size() / n_classes);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const float* row = scores.data() + r * n_classes;
    out[r] = static_cast<std::size_t>(std::max_element(row, row + n_classes) - row);
  }
  return out;
}

}  // namespace asc::decoders
