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

#include "asc/encoder/training.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "asc/nn/adam.hpp"

namespace asc::encoder {

using nn::Tensor;

PatchTriples align_patch_sets(std::array<dsp::PatchSet, 3> sets) {
  for (std::size_t k = 0; k < kBranches; ++k) {
    if (sets[k].kind != dsp::kAllKinds[k]) {
      throw std::invalid_argument(
          "align_patch_sets: slot " + std::to_string(k) + " holds " +
          std::string(dsp::to_string(sets[k].kind)) + " patches, expected " +
          std::string(dsp::to_string(dsp::kAllKinds[k])));
    }
  }
  std::map<dsp::PatchKey, std::array<int, 3>> seen;
  for (std::size_t k = 0; k < kBranches; ++k) {
    for (std::size_t i = 0; i < sets[k].patches.size(); ++i) {
      auto [it, fresh] = seen.try_emplace(sets[k].patches[i].key,
                                          std::array<int, 3>{-1, -1, -1});
      if (it->second[k] >= 0) {
        throw std::invalid_argument("align_patch_sets: duplicate key " +
                                    it->first.to_string() + " in " +
                                    std::string(dsp::to_string(sets[k].kind)));
      }
      it->second[k] = static_cast<int>(i);
    }
  }
  std::vector<std::string> orphans;
  std::size_t orphan_count = 0;
  for (const auto& [key, slots] : seen) {
    if (slots[0] >= 0 && slots[1] >= 0 && slots[2] >= 0) continue;
    ++orphan_count;
    if (orphans.size() < 10) orphans.push_back(key.to_string());
  }
  if (orphan_count) {
    std::string msg = "align_patch_sets: " + std::to_string(orphan_count) +
                      " orphan key(s):";
    for (const auto& k : orphans) msg += " " + k;
    if (orphan_count > orphans.size()) msg += " ...";
    throw std::invalid_argument(msg);
  }

  PatchTriples out;
  out.n_classes = sets[0].n_classes;
  for (std::size_t k = 0; k < kBranches; ++k) {
    out.sets[k].kind = sets[k].kind;
    out.sets[k].n_classes = sets[k].n_classes;
    out.sets[k].short_input = sets[k].short_input;
    out.sets[k].patches.reserve(seen.size());
  }
  for (const auto& [key, slots] : seen) {
    for (std::size_t k = 0; k < kBranches; ++k) {
      out.sets[k].patches.push_back(std::move(sets[k].patches[slots[k]]));
    }
    if (out.sets[1].patches.back().label != out.sets[0].patches.back().label ||
        out.sets[2].patches.back().label != out.sets[0].patches.back().label) {
      throw std::invalid_argument("align_patch_sets: labels disagree for " +
                                  key.to_string());
    }
  }
  return out;
}

void EncoderTrainConfig::validate() const {
  if (batch_size == 0) {
    throw std::invalid_argument("EncoderTrainConfig: batch_size must be > 0");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("EncoderTrainConfig: learning_rate must be > 0");
  }
  loss.validate();
  reg.validate();
  mixup.validate();
}

void build_batch(const PatchTriples& data,
                 std::span<const augment::MixEntry> entries, std::size_t side,
                 std::array<Tensor<float>, 3>& x, Tensor<float>& y) {
  const std::size_t b = entries.size();
  const std::size_t c = data.n_classes;
  const std::size_t p = side * side;
  for (auto& t : x) {
    if (t.shape() != nn::Shape{b, 1, side, side}) t = Tensor<float>({b, 1, side, side});
  }
  if (y.shape() != nn::Shape{b, c}) y = Tensor<float>({b, c});
  for (std::size_t r = 0; r < b; ++r) {
    const auto& e = entries[r];
    const auto& la = data.label(e.first);
    const auto& lb = data.label(e.second);
    if (la.size() != c || lb.size() != c) {
      throw std::invalid_argument("build_batch: patch " +
                                  data.key(e.first).to_string() +
                                  " has no label");
    }
    for (std::size_t k = 0; k < kBranches; ++k) {
      const auto& pa = data.sets[k].patches[e.first].values;
      const auto& pb = data.sets[k].patches[e.second].values;
      if (pa.size() != p || pb.size() != p) {
        throw std::invalid_argument("build_batch: patch " +
                                    data.key(e.first).to_string() +
                                    " does not match the model patch size");
      }
      std::span<float> out(x[k].data() + r * p, p);
      if (e.first == e.second) {
        std::copy(pa.begin(), pa.end(), out.begin());
      } else {
        augment::mixup_pair(pa, pb, la, lb, e.lambda, out,
                            std::span<float>(y.data() + r * c, c));
      }
    }
    if (e.first == e.second) {
      std::copy(la.begin(), la.end(), y.data() + r * c);
    }
  }
}

std::vector<EpochLog> train_encoder(Encoder<float>& model,
                                    const PatchTriples& data,
                                    const EncoderTrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("train_encoder: no patches");
  if (data.n_classes != model.config().n_classes) {
    throw std::invalid_argument("train_encoder: data has " +
                                std::to_string(data.n_classes) +
                                " classes, model " +
                                std::to_string(model.config().n_classes));
  }
  model.set_threads(cfg.threads);
  nn::Adam<float> adam({cfg.learning_rate});
  auto params = model.parameters();
  std::vector<EpochLog> log;
  std::array<Tensor<float>, 3> x;
  Tensor<float> y;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    augment::MixupConfig mix = cfg.mixup;
    mix.stage = augment::MixupStage::kPatch;
    mix.rng_seed = derive_seed(cfg.seed, 1000 + epoch);
    augment::MixupPlan plan;
    if (cfg.use_mixup) {
      plan = augment::plan_patch_mixup(n, mix);
    } else {
      for (std::size_t i = 0; i < n; ++i) plan.entries.push_back({i, i});
    }
    std::mt19937_64 order_rng(derive_seed(cfg.seed, 2000 + epoch));
    std::shuffle(plan.entries.begin(), plan.entries.end(), order_rng);

    EpochLog entry;
    entry.epoch = epoch;
    entry.items = plan.entries.size();
    for (std::size_t s = 0; s < plan.entries.size(); s += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, plan.entries.size() - s);
      build_batch(data, std::span(plan.entries).subspan(s, b),
                  model.config().patch_size, x, y);
      model.zero_grad();
      const auto out = model.forward(x, nn::Mode::kTrain);
      const auto loss = encoder_loss(out, y, cfg.loss, cfg.reg, params);
      model.backward(loss.grad_logits);
      nn::add_l2_gradient(params, cfg.reg.l2_lambda);
      adam.step(params);
      const double w = static_cast<double>(b);
      for (std::size_t k = 0; k < 4; ++k) {
        entry.loss.terms[k] += w * loss.report.terms[k];
      }
      entry.loss.l2 += w * loss.report.l2;
      entry.loss.total += w * loss.report.total;
    }
    const double inv = 1.0 / static_cast<double>(entry.items);
    for (double& t : entry.loss.terms) t *= inv;
    entry.loss.l2 *= inv;
    entry.loss.total *= inv;
    entry.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    log.push_back(entry);
    if (cfg.on_epoch) cfg.on_epoch(entry);
  }
  return log;
}

EncodedPatches encode_patches(const Encoder<float>& model,
                              const PatchTriples& data,
                              std::size_t batch_size) {
  if (batch_size == 0) {
    throw std::invalid_argument("encode_patches: batch_size must be > 0");
  }
  const std::size_t n = data.size();
  const std::size_t c = model.config().n_classes;
  EncodedPatches out;
  out.n_classes = c;
  out.keys.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.keys.push_back(data.key(i));
    out.labels.push_back(data.label(i));
  }
  for (std::size_t k = 0; k < 4; ++k) {
    out.features[k].resize(n * kFeatureDim);
    out.probs[k].resize(n * c);
  }
  const std::size_t side = model.config().patch_size;
  const std::size_t p = side * side;
  for (std::size_t s = 0; s < n; s += batch_size) {
    const std::size_t b = std::min(batch_size, n - s);
    std::array<Tensor<float>, 3> xb;
    for (std::size_t k = 0; k < kBranches; ++k) {
      xb[k] = Tensor<float>({b, 1, side, side});
      for (std::size_t i = 0; i < b; ++i) {
        const auto& v = data.sets[k].patches[s + i].values;
        if (v.size() != p) {
          throw std::invalid_argument("encode_patches: unexpected patch size");
        }
        std::copy(v.begin(), v.end(), xb[k].data() + i * p);
      }
    }
    const auto res = model.infer(xb);
    for (std::size_t k = 0; k < 4; ++k) {
      std::copy(res.features[k].values().begin(),
                res.features[k].values().end(),
                out.features[k].begin() + s * kFeatureDim);
      const auto probs = nn::softmax_rows(res.logits[k]);
      std::copy(probs.values().begin(), probs.values().end(),
                out.probs[k].begin() + s * c);
    }
  }
  return out;
}

std::vector<HighLevelFeature> to_records(const EncodedPatches& encoded) {
  std::vector<HighLevelFeature> out;
  out.reserve(4 * encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      const float* f = encoded.features[k].data() + i * kFeatureDim;
      out.push_back({encoded.keys[i], kAllSources[k],
                     std::vector<float>(f, f + kFeatureDim),
                     encoded.labels[i]});
    }
  }
  return out;
}

std::vector<HighLevelFeature> extract_features(const Encoder<float>& model,
                                               const PatchTriples& data,
                                               std::size_t batch_size) {
  return to_records(encode_patches(model, data, batch_size));
}

}  // namespace asc::encoder
