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

#include "driftscope/tree.hpp"

#include <algorithm>
#include <numeric>

#include "driftscope/errors.hpp"

namespace driftscope {

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.is_leaf()) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

std::vector<int> Tree::SplitColumns() const {
  std::vector<int> cols;
  for (const TreeNode& n : nodes) {
    if (!n.is_leaf()) cols.push_back(n.column);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

SortedColumns::SortedColumns(const EncodedMatrix& x)
    : rows_(x.rows), order_(x.rows * x.cols) {
  for (std::size_t c = 0; c < x.cols; ++c) {
    auto begin = order_.begin() + static_cast<std::ptrdiff_t>(c * rows_);
    std::iota(begin, begin + static_cast<std::ptrdiff_t>(rows_), 0u);
    std::stable_sort(begin, begin + static_cast<std::ptrdiff_t>(rows_),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return x.at(a, c) < x.at(b, c);
                     });
  }
}

namespace {

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
  double w = 0.0;
};

struct BestSplit {
  double gain = 0.0;
  int column = -1;
  double threshold = 0.0;
};

double Score(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? g * g / denom : 0.0;
}

}  // namespace

Tree GrowTree(const EncodedMatrix& x, const SortedColumns& sorted,
              std::span<const double> grad, std::span<const double> hess,
              std::span<const double> weight, const SplitParams& params,
              const ColumnFilter& filter) {
  const std::size_t n = x.rows;
  if (grad.size() != n || hess.size() != n || weight.size() != n) {
    throw ShapeError("grow_tree: gradient/hessian/weight length mismatch");
  }
  Tree tree;
  tree.nodes.emplace_back();

  // active[a] = tree node index of the a-th open node on this level.
  std::vector<int> active = {0};
  std::vector<NodeStats> stats(1);
  std::vector<int> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (weight[i] <= 0.0) continue;
    slot[i] = 0;
    stats[0].g += grad[i];
    stats[0].h += hess[i];
    stats[0].w += weight[i];
  }

  for (int depth = 0; !active.empty(); ++depth) {
    const std::size_t open = active.size();
    std::vector<BestSplit> best(open);
    for (std::size_t a = 0; a < open; ++a) best[a].gain = params.min_gain;

    if (depth < params.max_depth) {
      std::vector<NodeStats> left(open);
      std::vector<double> last(open);
      std::vector<char> seen(open);
      std::vector<char> allowed(open);
      std::vector<double> parent_score(open);
      for (std::size_t a = 0; a < open; ++a) {
        parent_score[a] = Score(stats[a].g, stats[a].h, params.lambda);
      }
      for (std::size_t c = 0; c < x.cols; ++c) {
        bool any = false;
        for (std::size_t a = 0; a < open; ++a) {
          allowed[a] = !filter || filter(active[a], c);
          any = any || allowed[a];
          left[a] = NodeStats{};
          seen[a] = 0;
        }
        if (!any) continue;
        for (std::uint32_t i : sorted.order(c)) {
          const int s = slot[i];
          if (s < 0) continue;
          const auto a = static_cast<std::size_t>(s);
          if (!allowed[a]) continue;
          const double v = x.at(i, c);
          if (seen[a] && v != last[a]) {
            const NodeStats& l = left[a];
            const double wr = stats[a].w - l.w;
            if (l.w >= params.min_leaf && wr >= params.min_leaf) {
              const double gain = Score(l.g, l.h, params.lambda) +
                                  Score(stats[a].g - l.g, stats[a].h - l.h,
                                        params.lambda) -
                                  parent_score[a];
              if (gain > best[a].gain) {
                double threshold = 0.5 * (last[a] + v);
                if (!(threshold > last[a])) threshold = v;
                best[a] = {gain, static_cast<int>(c), threshold};
              }
            }
          }
          left[a].g += grad[i];
          left[a].h += hess[i];
          left[a].w += weight[i];
          last[a] = v;
          seen[a] = 1;
        }
      }
    }

    // Materialize splits and leaves for this level.
    std::vector<int> next_active;
    std::vector<NodeStats> next_stats;
    std::vector<int> child_slot(open * 2, -1);
    for (std::size_t a = 0; a < open; ++a) {
      TreeNode& node = tree.nodes[static_cast<std::size_t>(active[a])];
      if (best[a].column < 0) {
        node.value = stats[a].h + params.lambda > 0.0
                         ? -stats[a].g / (stats[a].h + params.lambda)
                         : 0.0;
        continue;
      }
      node.column = best[a].column;
      node.threshold = best[a].threshold;
      const int left_index = static_cast<int>(tree.nodes.size());
      // `node` may dangle after emplace_back; write through the index.
      const std::size_t self = static_cast<std::size_t>(active[a]);
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      tree.nodes[self].left = left_index;
      tree.nodes[self].right = left_index + 1;
      child_slot[2 * a] = static_cast<int>(next_active.size());
      next_active.push_back(left_index);
      next_stats.emplace_back();
      child_slot[2 * a + 1] = static_cast<int>(next_active.size());
      next_active.push_back(left_index + 1);
      next_stats.emplace_back();
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int s = slot[i];
      if (s < 0) continue;
      const auto a = static_cast<std::size_t>(s);
      if (best[a].column < 0) {
        slot[i] = -1;
        continue;
      }
      const bool go_left =
          x.at(i, static_cast<std::size_t>(best[a].column)) < best[a].threshold;
      const int ns = child_slot[2 * a + (go_left ? 0 : 1)];
      slot[i] = ns;
      NodeStats& st = next_stats[static_cast<std::size_t>(ns)];
      st.g += grad[i];
      st.h += hess[i];
      st.w += weight[i];
    }
    active = std::move(next_active);
    stats = std::move(next_stats);
  }
  return tree;
}

}  // namespace driftscope
