/*
 * Copyright 2026 The DriftScope Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "driftscope/forest.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "driftscope/errors.hpp"
#include "driftscope/rng.hpp"

namespace driftscope {
namespace {

constexpr std::uint64_t kBootstrapStream = 0xb0075;
constexpr std::uint64_t kColumnStream = 0xc01;

Tree GrowClassification(const EncodedMatrix& train, const SortedColumns& sorted,
                        std::span<const int> labels,
                        std::span<const double> weights, int max_depth,
                        double min_leaf, const ColumnFilter& filter) {
  std::vector<double> grad(train.rows);
  for (std::size_t i = 0; i < train.rows; ++i) {
    grad[i] = -weights[i] * static_cast<double>(labels[i] != 0);
  }
  const SplitParams split{max_depth, /*lambda=*/0.0, min_leaf, 0.0};
  return GrowTree(train, sorted, grad, weights, weights, split, filter);
}

}  // namespace

ForestModel::ForestModel(std::vector<Tree> trees, ColumnMap columns)
    : trees_(std::move(trees)), columns_(std::move(columns)) {}

double ForestModel::PredictProba(std::span<const double> row) const {
  CheckWidth(row.size());
  if (trees_.empty()) return 0.5;
  double s = 0.0;
  for (const Tree& t : trees_) s += t.Predict(row);
  return s / static_cast<double>(trees_.size());
}

Tree FitClassificationTree(const EncodedMatrix& train, std::span<const int> labels,
                           std::span<const double> weights, int max_depth,
                           double min_leaf, const ColumnFilter& filter) {
  if (labels.size() != train.rows || weights.size() != train.rows) {
    throw ShapeError("fit_tree: label/weight length mismatch");
  }
  const SortedColumns sorted(train);
  return GrowClassification(train, sorted, labels, weights, max_depth, min_leaf,
                            filter);
}

ForestModel FitRandomForest(const EncodedMatrix& train, std::span<const int> labels,
                            const ForestParams& params) {
  if (labels.size() != train.rows) throw ShapeError("fit_random_forest: label count mismatch");
  if (params.n_trees < 1 || params.max_depth < 0 || params.min_leaf < 1.0) {
    throw ConfigError("fit_random_forest: invalid parameters");
  }
  double positives = 0.0;
  for (int y : labels) positives += (y != 0);
  if (positives == 0.0 || positives == static_cast<double>(labels.size())) {
    throw DegenerateError("fit_random_forest: labels contain a single class");
  }
  const SortedColumns sorted(train);
  const std::size_t n = train.rows;
  const std::size_t m = train.cols;
  const auto k = static_cast<std::size_t>(
      std::max(1.0, std::round(std::sqrt(static_cast<double>(m)))));

  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    const auto tree_id = static_cast<std::uint64_t>(t);
    std::vector<double> weights(n, 1.0);
    if (params.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0.0);
      CounterRng rng({params.seed, tree_id, kBootstrapStream});
      for (std::size_t i = 0; i < n; ++i) weights[rng.Below(n)] += 1.0;
    }
    ColumnFilter filter;
    if (params.feature_subsample && k < m) {
      auto cache = std::make_shared<std::map<int, std::vector<char>>>();
      filter = [=, seed = params.seed](int node, std::size_t column) {
        auto it = cache->find(node);
        if (it == cache->end()) {
          CounterRng rng({seed, tree_id, kColumnStream,
                          static_cast<std::uint64_t>(node)});
          std::vector<std::size_t> cols(m);
          std::iota(cols.begin(), cols.end(), 0);
          std::vector<char> chosen(m, 0);
          for (std::size_t j = 0; j < k; ++j) {
            const std::size_t pick = j + rng.Below(m - j);
            std::swap(cols[j], cols[pick]);
            chosen[cols[j]] = 1;
          }
          it = cache->emplace(node, std::move(chosen)).first;
        }
        return it->second[column] != 0;
      };
    }
    trees.push_back(GrowClassification(train, sorted, labels, weights,
                                       params.max_depth, params.min_leaf, filter));
  }
  return ForestModel(std::move(trees), train.columns);
}

}  // namespace driftscope
