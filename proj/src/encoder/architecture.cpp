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

#include "asc/encoder/architecture.hpp"

#include <stdexcept>

namespace asc::encoder {

using nn::LayerSpec;

std::string_view to_string(WidthProfile profile) {
  return profile == WidthProfile::kFull ? "full" : "compact";
}

WidthProfile width_profile_from_string(std::string_view name) {
  if (name == "full") return WidthProfile::kFull;
  if (name == "compact") return WidthProfile::kCompact;
  throw std::invalid_argument("unknown width profile '" + std::string(name) +
                              "' (expected full or compact)");
}

std::array<std::size_t, 6> cnn_widths(WidthProfile profile) {
  if (profile == WidthProfile::kFull) return {32, 64, 128, 128, 256, 256};
  return {4, 8, 8, 16, 16, kFeatureDim};
}

std::vector<LayerSpec> cnn_specs(WidthProfile profile) {
  const auto widths = cnn_widths(profile);
  std::vector<LayerSpec> specs;
  for (std::size_t b = 0; b < widths.size(); ++b) {
    specs.push_back(LayerSpec::batch_norm());
    specs.push_back(LayerSpec::conv(kCnnKernels[b], widths[b]));
    specs.push_back(LayerSpec::relu());
    specs.push_back(LayerSpec::batch_norm());
    if (kCnnPool[b]) specs.push_back(LayerSpec::avg_pool());
    if (b + 1 == widths.size()) specs.push_back(LayerSpec::global_avg_pool());
    specs.push_back(LayerSpec::dropout(kCnnDropout[b]));
  }
  return specs;
}

std::vector<LayerSpec> dnn01_specs(std::size_t n_classes) {
  return {LayerSpec::dense(n_classes)};
}

std::vector<LayerSpec> dense_stack_specs(const std::vector<std::size_t>& hidden,
                                         double dropout, std::size_t out) {
  std::vector<LayerSpec> specs;
  for (std::size_t h : hidden) {
    specs.push_back(LayerSpec::dense(h));
    specs.push_back(LayerSpec::relu());
    specs.push_back(LayerSpec::dropout(dropout));
  }
  if (out > 0) specs.push_back(LayerSpec::dense(out));
  return specs;
}

std::vector<LayerSpec> dnn02_specs(std::size_t n_classes) {
  return dense_stack_specs({512, 1024}, 0.3, n_classes);
}

}  // namespace asc::encoder
