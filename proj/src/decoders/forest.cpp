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

#include "asc/decoders/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "asc/util/seed.hpp"

namespace asc::decoders {

void ForestConfig::validate() const {
  if (n_trees == 0) throw std::invalid_argument("ForestConfig: n_trees must be > 0");
  if (max_depth == 0) {
    throw std::invalid_argument("ForestConfig: max_depth must be > 0");
  }
  if (min_leaf == 0) {
    throw std::invalid_argument("ForestConfig: min_leaf must be > 0");
  }
  if (mtry == 0) throw std::invalid_argument("ForestConfig: mtry must be > 0");
}

std::size_t RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack = {{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const TreeNode& n = nodes[id];
    if (n.feature >= 0) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return deepest;
}

std::span<const float> RegressionTree::predict(std::span<const float> x) const {
  std::int32_t id = 0;
  while (nodes[id].feature >= 0) {
    const TreeNode& n = nodes[id];
    id = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return {leaf_values.data() + nodes[id].leaf * n_outputs, n_outputs};
}

bool operator==(const RegressionTree& a, const RegressionTree& b) {
  if (a.n_outputs != b.n_outputs || a.nodes.size() != b.nodes.size() ||
      a.leaf_values != b.leaf_values) {
    return false;
  }
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const TreeNode& p = a.nodes[i];
    const TreeNode& q = b.nodes[i];
    if (p.feature != q.feature || p.left != q.left || p.right != q.right ||
        p.leaf != q.leaf ||
        std::memcmp(&p.threshold, &q.threshold, sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

namespace {

struct Split {
  std::int32_t feature = -1;
  float threshold = 0.0f;
  double gain = -std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const float> x, std::span<const float> y,
              std::size_t dim, std::size_t n_outputs, const ForestConfig& cfg,
              std::uint64_t seed)
      : x_(x), y_(y), dim_(dim), c_(n_outputs), cfg_(cfg), rng_(seed),
        features_(dim) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  RegressionTree build(std::vector<std::size_t> rows) {
    tree_ = RegressionTree{};
    tree_.n_outputs = c_;
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t make_leaf(std::span<const std::size_t> rows) {
    std::vector<double> mean(c_, 0.0);
    for (std::size_t r : rows) {
      for (std::size_t k = 0; k < c_; ++k) mean[k] += y_[r * c_ + k];
    }
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    TreeNode node;
    node.leaf = static_cast<std::int32_t>(tree_.leaf_count());
    for (double m : mean) {
      tree_.leaf_values.push_back(
          static_cast<float>(m / static_cast<double>(rows.size())));
    }
    tree_.nodes.push_back(node);
    return id;
  }

  bool pure(std::span<const std::size_t> rows) const {
    for (std::size_t r : rows) {
      for (std::size_t k = 0; k < c_; ++k) {
        if (y_[r * c_ + k] != y_[rows[0] * c_ + k]) return false;
      }
    }
    return true;
  }

  Split best_split(std::vector<std::size_t>& rows) {
    // Partial Fisher-Yates picks mtry distinct features; visit them sorted.
    const std::size_t m = std::min(cfg_.mtry, dim_);
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, dim_ - 1);
      std::swap(features_[i], features_[pick(rng_)]);
    }
    std::vector<std::size_t> candidates(features_.begin(),
                                        features_.begin() + m);
    std::sort(candidates.begin(), candidates.end());

    const std::size_t n = rows.size();
    std::vector<double> total(c_, 0.0);
    for (std::size_t r : rows) {
      for (std::size_t k = 0; k < c_; ++k) total[k] += y_[r * c_ + k];
    }
    Split best;
    std::vector<double> left(c_);
    for (std::size_t f : candidates) {
      std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        return x_[a * dim_ + f] < x_[b * dim_ + f];
      });
      std::fill(left.begin(), left.end(), 0.0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t k = 0; k < c_; ++k) left[k] += y_[rows[i] * c_ + k];
        const float a = x_[rows[i] * dim_ + f];
        const float b = x_[rows[i + 1] * dim_ + f];
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (a == b || nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        // SSE(L) + SSE(R) = sum y^2 - |S_L|^2 / n_L - |S_R|^2 / n_R.
        double sl = 0.0, sr = 0.0;
        for (std::size_t k = 0; k < c_; ++k) {
          sl += left[k] * left[k];
          const double rk = total[k] - left[k];
          sr += rk * rk;
        }
        const double gain = sl / static_cast<double>(nl) +
                            sr / static_cast<double>(nr);
        if (gain > best.gain) {
          float t = static_cast<float>(0.5 * (static_cast<double>(a) + b));
          if (!(t < b)) t = a;
          best = {static_cast<std::int32_t>(f), t, gain};
        }
      }
    }
    return best;
  }

  std::int32_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
    if (depth >= cfg_.max_depth || rows.size() < 2 * cfg_.min_leaf ||
        pure(rows)) {
      return make_leaf(rows);
    }
    const Split split = best_split(rows);
    if (split.feature < 0) return make_leaf(rows);
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x_[r * dim_ + split.feature] <= split.threshold ? left : right).push_back(r);
    }
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({split.feature, split.threshold, -1, -1, -1});
    rows.clear();
    rows.shrink_to_fit();
    const std::int32_t l = grow(left, depth + 1);
    const std::int32_t r = grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  std::span<const float> x_;
  std::span<const float> y_;
  std::size_t dim_;
  std::size_t c_;
  const ForestConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> features_;
  RegressionTree tree_;
};

}  // namespace

RegressionTree fit_tree(std::span<const float> x, std::span<const float> y,
                        std::size_t dim, std::size_t n_outputs,
                        std::span<const std::size_t> rows,
                        const ForestConfig& cfg, std::uint64_t seed) {
  if (rows.empty()) throw std::invalid_argument("fit_tree: no rows");
  TreeBuilder builder(x, y, dim, n_outputs, cfg, seed);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

void RandomForest::fit(std::span<const float> x, std::span<const float> y,
                       const ForestConfig& cfg) {
  cfg.validate();
  if (dim_ == 0 || n_outputs_ == 0) {
    throw std::invalid_argument("RandomForest: dimensions not set");
  }
  const std::size_t n = x.size() / dim_;
  if (n < 2) {
    throw std::invalid_argument("RandomForest: need at least 2 training rows");
  }
  if (x.size() != n * dim_ || y.size() != n * n_outputs_) {
    throw std::invalid_argument("RandomForest: x/y sizes do not match");
  }
  trees_.assign(cfg.n_trees, RegressionTree{});
  auto fit_one = [&](std::size_t t) {
    const std::uint64_t seed = derive_seed(cfg.seed, t);
    std::vector<std::size_t> rows(n);
    if (cfg.bootstrap) {
      std::mt19937_64 rng(derive_seed(seed, 0xb007));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees_[t] = fit_tree(x, y, dim_, n_outputs_, rows, cfg, seed);
  };
  const std::size_t workers = std::min(std::max<std::size_t>(cfg.threads, 1),
                                       cfg.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < cfg.n_trees; ++t) fit_one(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t; (t = next++) < cfg.n_trees;) fit_one(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<float> RandomForest::predict(std::span<const float> x) const {
  if (x.size() != dim_) {
    throw std::invalid_argument("RandomForest::predict: expected " +
                                std::to_string(dim_) + " features, got " +
                                std::to_string(x.size()));
  }
  if (trees_.empty()) throw std::logic_error("RandomForest: not fitted");
  std::vector<double> acc(n_outputs_, 0.0);
  for (const auto& tree : trees_) {
    const auto leaf = tree.predict(x);
    for (std::size_t k = 0; k < n_outputs_; ++k) acc[k] += leaf[k];
  }
  std::vector<float> out(n_outputs_);
  for (std::size_t k = 0; k < n_outputs_; ++k) {
    out[k] = static_cast<float>(acc[k] / static_cast<double>(trees_.size()));
  }
  return out;
}

}  // namespace asc::decoders
