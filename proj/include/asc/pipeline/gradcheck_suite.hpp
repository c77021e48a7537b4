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

// Finite-difference gradient checks over every trainable building block on
// small random instances (at most 5 x 5 x 3), in double precision.

#ifndef ASC_PIPELINE_GRADCHECK_SUITE_HPP_
#define ASC_PIPELINE_GRADCHECK_SUITE_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace asc::pipeline {

struct GradCheckResult {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t entries = 0;  // perturbed values
};

// Central differences with h = 1e-3 against the analytic backward pass.
std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed = 7);

}  // namespace asc::pipeline

#endif  // ASC_PIPELINE_GRADCHECK_SUITE_HPP_
