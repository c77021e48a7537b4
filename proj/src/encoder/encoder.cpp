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

#include "asc/encoder/encoder.hpp"

#include <exception>
#include <stdexcept>
#include <thread>

namespace asc::encoder {

using nn::Mode;
using nn::Tensor;

std::string_view to_string(FeatureSource source) {
  switch (source) {
    case FeatureSource::kLogMel: return "logmel";
    case FeatureSource::kGamma: return "gamma";
    case FeatureSource::kCqt: return "cqt";
    case FeatureSource::kCombined: return "combined";
  }
  return "?";
}

FeatureSource feature_source_from_string(std::string_view name) {
  for (FeatureSource s : kAllSources) {
    if (name == to_string(s) || name == source_tag(s)) return s;
  }
  throw std::invalid_argument("unknown feature source '" + std::string(name) +
                              "'");
}

std::string_view source_tag(FeatureSource source) {
  switch (source) {
    case FeatureSource::kLogMel: return "lm";
    case FeatureSource::kGamma: return "ga";
    case FeatureSource::kCqt: return "cq";
    case FeatureSource::kCombined: return "com";
  }
  return "?";
}

void EncoderConfig::validate() const {
  if (n_classes < 2) {
    throw std::invalid_argument("EncoderConfig: n_classes must be >= 2");
  }
  if (patch_size < 16) {
    throw std::invalid_argument("EncoderConfig: patch_size must be >= 16");
  }
}

void EncoderLossConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw std::invalid_argument("EncoderLossConfig: alpha and beta must be >= 0");
  }
}

namespace {

template <typename T>
void prefix_names(std::vector<nn::Parameter<T>*> params,
                  const std::string& prefix) {
  for (auto* p : params) p->name = prefix + p->name;
}

}  // namespace

template <typename T>
Encoder<T>::Encoder(const EncoderConfig& cfg)
    : cfg_((cfg.validate(), cfg)), combiner_(cfg.combiner, kFeatureDim) {
  const nn::Shape patch = {1, cfg.patch_size, cfg.patch_size};
  for (std::size_t b = 0; b < kBranches; ++b) {
    const std::string tag(source_tag(kAllSources[b]));
    cnn_[b] = nn::Sequential<T>(patch, cnn_specs(cfg.profile),
                                derive_seed(cfg.seed, 10 + b));
    head_[b] = nn::Sequential<T>({kFeatureDim}, dnn01_specs(cfg.n_classes),
                                 derive_seed(cfg.seed, 20 + b));
    prefix_names(cnn_[b].parameters(), "cnn_" + tag + ".");
    prefix_names(head_[b].parameters(), "head_" + tag + ".");
  }
  dnn2_ = nn::Sequential<T>({kFeatureDim}, dnn02_specs(cfg.n_classes),
                            derive_seed(cfg.seed, 30));
  prefix_names(combiner_.parameters(), "combiner.");
  prefix_names(dnn2_.parameters(), "dnn2.");
}

template <typename T>
template <typename Fn>
void Encoder<T>::for_branches(Fn&& fn) {
  if (threads_ <= 1) {
    for (std::size_t b = 0; b < kBranches; ++b) fn(b);
    return;
  }
  std::vector<std::thread> workers;
  std::array<std::exception_ptr, kBranches> errors;
  for (std::size_t b = 1; b < kBranches; ++b) {
    workers.emplace_back([&, b] {
      try {
        fn(b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    });
  }
  try {
    fn(0);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename T>
void Encoder<T>::check_inputs(const std::array<Tensor<T>, 3>& x) const {
  for (std::size_t b = 0; b < kBranches; ++b) {
    if (x[b].rank() != 4 || x[b].dim(0) != x[0].dim(0) || x[b].dim(1) != 1 ||
        x[b].dim(2) != cfg_.patch_size || x[b].dim(3) != cfg_.patch_size) {
      throw std::invalid_argument(
          "Encoder: branch " + std::string(to_string(kAllSources[b])) +
          " expects [N, 1, " + std::to_string(cfg_.patch_size) + ", " +
          std::to_string(cfg_.patch_size) + "], got " +
          nn::shape_string(x[b].shape()));
    }
  }
}

template <typename T>
EncoderOutput<T> Encoder<T>::forward(const std::array<Tensor<T>, 3>& x,
                                     Mode mode) {
  check_inputs(x);
  EncoderOutput<T> out;
  for_branches([&](std::size_t b) {
    out.features[b] = cnn_[b].forward(x[b], mode);
    out.logits[b] = head_[b].forward(out.features[b], mode);
  });
  out.features[3] =
      combiner_.forward(out.features[0], out.features[1], out.features[2]);
  out.logits[3] = dnn2_.forward(out.features[3], mode);
  return out;
}

template <typename T>
EncoderOutput<T> Encoder<T>::infer(const std::array<Tensor<T>, 3>& x) const {
  check_inputs(x);
  EncoderOutput<T> out;
  for (std::size_t b = 0; b < kBranches; ++b) {
    out.features[b] = cnn_[b].infer(x[b]);
    out.logits[b] = head_[b].infer(out.features[b]);
  }
  out.features[3] =
      combiner_.infer(out.features[0], out.features[1], out.features[2]);
  out.logits[3] = dnn2_.infer(out.features[3]);
  return out;
}

template <typename T>
void Encoder<T>::backward(const std::array<Tensor<T>, 4>& grad_logits) {
  const Tensor<T> d_combined = dnn2_.backward(grad_logits[3]);
  const auto d_features = combiner_.backward(d_combined);
  for_branches([&](std::size_t b) {
    Tensor<T> d = head_[b].backward(grad_logits[b]);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += d_features[b][i];
    cnn_[b].backward(d);
  });
}

template <typename T>
std::vector<nn::Parameter<T>*> Encoder<T>::parameters() {
  std::vector<nn::Parameter<T>*> out;
  auto append = [&](std::vector<nn::Parameter<T>*> ps) {
    out.insert(out.end(), ps.begin(), ps.end());
  };
  for (std::size_t b = 0; b < kBranches; ++b) {
    append(cnn_[b].parameters());
    append(head_[b].parameters());
  }
  append(combiner_.parameters());
  append(dnn2_.parameters());
  return out;
}

template <typename T>
std::vector<nn::NamedBuffer<T>> Encoder<T>::buffers() {
  std::vector<nn::NamedBuffer<T>> out;
  auto append = [&](std::vector<nn::NamedBuffer<T>> bs,
                    const std::string& prefix) {
    for (auto& b : bs) {
      b.name = prefix + b.name;
      out.push_back(b);
    }
  };
  for (std::size_t b = 0; b < kBranches; ++b) {
    const std::string tag(source_tag(kAllSources[b]));
    append(cnn_[b].buffers(), "cnn_" + tag + ".");
    append(head_[b].buffers(), "head_" + tag + ".");
  }
  append(dnn2_.buffers(), "dnn2.");
  return out;
}

template <typename T>
std::size_t Encoder<T>::parameter_count() {
  std::size_t n = 0;
  for (auto* p : parameters()) n += p->value.size();
  return n;
}

template <typename T>
void Encoder<T>::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(T(0));
}

double combine_losses(const std::array<double, 3>& branch, double combined,
                      const EncoderLossConfig& cfg) {
  cfg.validate();
  return cfg.alpha * (branch[0] + branch[1] + branch[2]) + cfg.beta * combined;
}

template <typename T>
EncoderLossResult<T> encoder_loss(const EncoderOutput<T>& out,
                                  const Tensor<T>& targets,
                                  const EncoderLossConfig& cfg,
                                  const nn::LossConfig& reg,
                                  const std::vector<nn::Parameter<T>*>& params) {
  cfg.validate();
  reg.validate();
  EncoderLossResult<T> result;
  for (std::size_t k = 0; k < 4; ++k) {
    const double scale = k == kCombinedIndex ? cfg.beta : cfg.alpha;
    auto sce = nn::softmax_cross_entropy(out.logits[k], targets, reg.log_floor,
                                         static_cast<T>(scale));
    result.report.terms[k] = sce.loss;
    result.grad_logits[k] = std::move(sce.grad_logits);
  }
  if (!params.empty()) {
    result.report.l2 = nn::l2_penalty(params, reg.l2_lambda);
  }
  const auto& t = result.report.terms;
  result.report.total =
      combine_losses({t[0], t[1], t[2]}, t[3], cfg) + result.report.l2;
  return result;
}

template class Encoder<float>;
template class Encoder<double>;

#define ASC_INSTANTIATE_ENCODER_LOSS(T)                                  \
  template EncoderLossResult<T> encoder_loss<T>(                         \
      const EncoderOutput<T>&, const Tensor<T>&, const EncoderLossConfig&, \
      const nn::LossConfig&, const std::vector<nn::Parameter<T>*>&);

ASC_INSTANTIATE_ENCODER_LOSS(float)
ASC_INSTANTIATE_ENCODER_LOSS(double)

}  // namespace asc::encoder
