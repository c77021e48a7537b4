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

#include "asc/augment/mixup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "asc/util/seed.hpp"

namespace asc::augment {
namespace {

// Sattolo's algorithm: a uniformly random single n-cycle, hence no fixed
// points for n >= 2.
std::vector<std::size_t> cyclic_permutation(std::size_t n,
                                            std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i-- > 1;) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(p[i], p[pick(rng)]);
  }
  return p;
}

double sample_beta(double alpha, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(alpha, 1.0);
  const double a = g(rng);
  const double b = g(rng);
  return a + b > 0.0 ? a / (a + b) : 0.5;
}

void append_mixed(std::vector<MixEntry>& out, std::size_t n, MixSource source,
                  const MixupConfig& cfg, std::mt19937_64& rng) {
  const auto partner = cyclic_permutation(n, rng);
  std::normal_distribution<double> gauss(cfg.gaussian_mean, cfg.gaussian_std);
  for (std::size_t i = 0; i < n; ++i) {
    double lambda = source == MixSource::kBeta ? sample_beta(cfg.beta_alpha, rng)
                                               : gauss(rng);
    lambda = std::clamp(lambda, 0.0, 1.0);
    out.push_back({i, partner[i], static_cast<float>(lambda), source});
  }
}

MixupPlan build_plan(std::size_t n, const MixupConfig& cfg, bool gaussian) {
  cfg.validate();
  MixupPlan plan;
  for (std::size_t i = 0; i < n; ++i) {
    plan.entries.push_back({i, i, 1.0f, MixSource::kOriginal});
  }
  if (n < 2) {
    plan.degenerate = true;
    return plan;
  }
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, gaussian ? 1 : 2));
  append_mixed(plan.entries, n, MixSource::kBeta, cfg, rng);
  if (gaussian) append_mixed(plan.entries, n, MixSource::kGaussian, cfg, rng);
  return plan;
}

}  // namespace

void MixupConfig::validate() const {
  if (!(beta_alpha > 0.0)) {
    throw std::invalid_argument("MixupConfig: beta_alpha must be > 0");
  }
  if (!(gaussian_std > 0.0)) {
    throw std::invalid_argument("MixupConfig: gaussian_std must be > 0");
  }
  if (!std::isfinite(gaussian_mean)) {
    throw std::invalid_argument("MixupConfig: gaussian_mean must be finite");
  }
}

void mixup_pair(std::span<const float> x_i, std::span<const float> x_j,
                std::span<const float> y_i, std::span<const float> y_j,
                double lambda, std::span<float> out_x, std::span<float> out_y) {
  if (x_i.size() != x_j.size() || x_i.size() != out_x.size() ||
      y_i.size() != y_j.size() || y_i.size() != out_y.size()) {
    throw std::invalid_argument("mixup_pair: shape mismatch");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("mixup_pair: lambda must be in [0, 1]");
  }
  const float a = static_cast<float>(lambda);
  const float b = static_cast<float>(1.0 - lambda);
  for (std::size_t k = 0; k < x_i.size(); ++k) {
    out_x[k] = a * x_i[k] + b * x_j[k];
  }
  for (std::size_t k = 0; k < y_i.size(); ++k) {
    out_y[k] = a * y_i[k] + b * y_j[k];
  }
}

MixupPlan plan_patch_mixup(std::size_t n, const MixupConfig& cfg) {
  return build_plan(n, cfg, true);
}

MixupPlan plan_feature_mixup(std::size_t n, const MixupConfig& cfg) {
  return build_plan(n, cfg, false);
}

MixupPlan plan_mixup(std::size_t n, const MixupConfig& cfg) {
  return cfg.stage == MixupStage::kPatch ? plan_patch_mixup(n, cfg)
                                         : plan_feature_mixup(n, cfg);
}

LabeledSet apply_plan(const LabeledSet& in, const MixupPlan& plan) {
  const std::size_t n = in.size();
  if (in.x.size() != n * in.item_size || in.y.size() != n * in.n_classes) {
    throw std::invalid_argument("apply_plan: inconsistent set dimensions");
  }
  LabeledSet out;
  out.item_size = in.item_size;
  out.n_classes = in.n_classes;
  out.degenerate = plan.degenerate;
  out.x.resize(plan.entries.size() * in.item_size);
  out.y.resize(plan.entries.size() * in.n_classes);
  const std::size_t d = in.item_size;
  const std::size_t c = in.n_classes;
  for (std::size_t e = 0; e < plan.entries.size(); ++e) {
    const MixEntry& m = plan.entries[e];
    if (m.first >= n || m.second >= n) {
      throw std::invalid_argument("apply_plan: entry index out of range");
    }
    mixup_pair({in.x.data() + m.first * d, d}, {in.x.data() + m.second * d, d},
               {in.y.data() + m.first * c, c}, {in.y.data() + m.second * c, c},
               m.lambda, {out.x.data() + e * d, d}, {out.y.data() + e * c, c});
  }
  return out;
}

LabeledSet augment_patch_set(const LabeledSet& patches,
                             const MixupConfig& cfg) {
  return apply_plan(patches, plan_patch_mixup(patches.size(), cfg));
}

LabeledSet augment_feature_set(const LabeledSet& features,
                               const MixupConfig& cfg) {
  if (cfg.stage != MixupStage::kFeature) {
    throw std::invalid_argument(
        "augment_feature_set: config stage must be Feature");
  }
  return apply_plan(features, plan_feature_mixup(features.size(), cfg));
}

}  // namespace asc::augment
