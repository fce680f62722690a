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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "driftscope/encoding.hpp"

namespace driftscope {

// Internal nodes send a row left when row[column] < threshold. Leaves carry
// `value` and have column == -1.
struct TreeNode {
  int column = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return column < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // `value(column)` supplies the feature values; lets callers route
  // composite rows without materializing them.
  template <class ValueFn>
  double Evaluate(ValueFn&& value) const {
    int n = 0;
    while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
      const TreeNode& node = nodes[static_cast<std::size_t>(n)];
      n = value(static_cast<std::size_t>(node.column)) < node.threshold
              ? node.left
              : node.right;
    }
    return nodes[static_cast<std::size_t>(n)].value;
  }
  double Predict(std::span<const double> row) const {
    return Evaluate([&](std::size_t c) { return row[c]; });
  }
  int depth() const;
  // Distinct split columns, ascending.
  std::vector<int> SplitColumns() const;
};

// Per-column row orderings (ascending value, ties by row index), computed
// once per training matrix and shared across trees.
class SortedColumns {
 public:
  explicit SortedColumns(const EncodedMatrix& x);
  std::span<const std::uint32_t> order(std::size_t column) const {
    return {order_.data() + column * rows_, rows_};
  }

 private:
  std::size_t rows_;
  std::vector<std::uint32_t> order_;
};

struct SplitParams {
  int max_depth = 3;
  double lambda = 1.0;
  // Minimum summed row weight on each side of a split.
  double min_leaf = 20.0;
  double min_gain = 0.0;
};

// Optional per-node column filter: (node index, column) -> candidate?
using ColumnFilter = std::function<bool(int node, std::size_t column)>;

// Exact greedy second-order tree grown level by level. Leaf value is
// -G / (H + lambda). Rows with weight 0 are ignored. Split gain ties go to
// the lowest column, then the lowest threshold.
Tree GrowTree(const EncodedMatrix& x, const SortedColumns& sorted,
              std::span<const double> grad, std::span<const double> hess,
              std::span<const double> weight, const SplitParams& params,
              const ColumnFilter& filter = {});

}  // namespace driftscope
