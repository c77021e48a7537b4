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

#ifndef ASC_NN_GRADCHECK_HPP_
#define ASC_NN_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <span>

namespace asc::nn {

struct GradCheckOptions {
  double step = 1e-3;
  // Entries whose analytic and numeric magnitudes are both below this are
  // compared in absolute terms.
  double magnitude_floor = 1e-4;
};

// Compares `analytic` against central differences of `loss` taken by
// perturbing each entry of `values` in place. Returns the maximum of
// |a - n| / max(|a|, |n|, floor) over all entries.
template <typename T, typename LossFn>
double max_relative_error(std::span<T> values, std::span<const T> analytic,
                          LossFn&& loss, const GradCheckOptions& opt = {}) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T saved = values[i];
    values[i] = static_cast<T>(saved + opt.step);
    const double plus = static_cast<double>(loss());
    values[i] = static_cast<T>(saved - opt.step);
    const double minus = static_cast<double>(loss());
    values[i] = saved;
    const double numeric = (plus - minus) / (2.0 * opt.step);
    const double a = static_cast<double>(analytic[i]);
    const double denom =
        std::max({std::abs(a), std::abs(numeric), opt.magnitude_floor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace asc::nn

#endif  // ASC_NN_GRADCHECK_HPP_
