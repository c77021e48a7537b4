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

// Layer recipes for the encoder and decoder networks.
//
// CNN block i: Bn - Cv[k_i] - Relu - Bn - (Ap) - Dr(r_i), with global
// average pooling ahead of the last dropout. Input [1, 128, 128], output
// [256] under every width profile.

#ifndef ASC_ENCODER_ARCHITECTURE_HPP_
#define ASC_ENCODER_ARCHITECTURE_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "asc/nn/layers.hpp"

namespace asc::encoder {

inline constexpr std::size_t kFeatureDim = 256;

// kFull: 32-64-128-128-256-256 channels. kCompact: 4-8-8-16-16-256, same
// kernels, pooling and dropout, for single-machine runs.
enum class WidthProfile { kFull, kCompact };

std::string_view to_string(WidthProfile profile);
WidthProfile width_profile_from_string(std::string_view name);

std::array<std::size_t, 6> cnn_widths(WidthProfile profile);
inline constexpr std::array<std::size_t, 6> kCnnKernels = {9, 7, 5, 5, 3, 3};
inline constexpr std::array<double, 6> kCnnDropout = {0.1,  0.15, 0.2,
                                                      0.2,  0.25, 0.25};
inline constexpr std::array<bool, 6> kCnnPool = {true,  true,  false,
                                                 true,  false, false};

std::vector<nn::LayerSpec> cnn_specs(WidthProfile profile);

// DNN-01: Dense 256 -> C.
std::vector<nn::LayerSpec> dnn01_specs(std::size_t n_classes);

// Fully connected stack: Dense(h) - ReLU - Dropout(rate) per hidden width,
// then Dense(out) when out > 0.
std::vector<nn::LayerSpec> dense_stack_specs(
    const std::vector<std::size_t>& hidden, double dropout, std::size_t out);

// DNN-02: 512 - 1024 - C, dropout 0.3.
std::vector<nn::LayerSpec> dnn02_specs(std::size_t n_classes);

}  // namespace asc::encoder

#endif  // ASC_ENCODER_ARCHITECTURE_HPP_
