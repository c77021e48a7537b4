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

// Regression forest over dense feature rows with vector-valued targets.
//
// Splits minimize the summed per-output squared error of the two children;
// leaves hold mean target vectors. Candidate features are visited in
// ascending index and thresholds in ascending value; only a strictly better
// gain replaces the incumbent, so ties go to the lowest feature, then the
// lowest threshold.

#ifndef ASC_DECODERS_FOREST_HPP_
#define ASC_DECODERS_FOREST_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace asc::decoders {

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 20;
  std::size_t min_leaf = 2;
  std::size_t mtry = 16;  // candidate features per split, capped at dim
  bool bootstrap = true;  // sample n rows with replacement per tree
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  float threshold = 0.0f;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t leaf = -1;     // row in RegressionTree::leaf_values
};

struct RegressionTree {
  std::size_t n_outputs = 0;
  std::vector<TreeNode> nodes;     // root at 0
  std::vector<float> leaf_values;  // n_leaves x n_outputs

  std::size_t leaf_count() const {
    return n_outputs ? leaf_values.size() / n_outputs : 0;
  }
  std::size_t depth() const;
  // Leaf vector for one feature row.
  std::span<const float> predict(std::span<const float> x) const;

  friend bool operator==(const RegressionTree& a, const RegressionTree& b);
};

// Fits one tree on the given row indices (duplicates allowed).
RegressionTree fit_tree(std::span<const float> x, std::span<const float> y,
                        std::size_t dim, std::size_t n_outputs,
                        std::span<const std::size_t> rows,
                        const ForestConfig& cfg, std::uint64_t seed);

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(std::size_t dim, std::size_t n_outputs)
      : dim_(dim), n_outputs_(n_outputs) {}

  // x is n x dim, y is n x n_outputs. Tree t uses seed
  // derive_seed(cfg.seed, t), so results do not depend on cfg.threads.
  void fit(std::span<const float> x, std::span<const float> y,
           const ForestConfig& cfg);

  // Mean of the per-tree leaf vectors.
  std::vector<float> predict(std::span<const float> x) const;

  std::size_t dim() const { return dim_; }
  std::size_t n_outputs() const { return n_outputs_; }
  std::vector<RegressionTree>& trees() { return trees_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  std::size_t dim_ = 0;
  std::size_t n_outputs_ = 0;
  std::vector<RegressionTree> trees_;
};

}  // namespace asc::decoders

#endif  // ASC_DECODERS_FOREST_HPP_
