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

#include "driftscope/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "driftscope/errors.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/rng.hpp"

namespace driftscope {
namespace {

// Trees are packed into groups touching at most this many players.
constexpr int kGroupPlayerCap = 6;

Coalition Bit(std::size_t p) { return Coalition{1} << p; }

}  // namespace

std::string ProvenanceName(BackgroundProvenance p) {
  return p == BackgroundProvenance::kStaticTrain ? "static-train"
                                                  : "sliding-window";
}

void BackgroundSet::Canonicalize() {
  std::sort(records.begin(), records.end(),
            [](const LoanRecord& a, const LoanRecord& b) {
              return a.year != b.year ? a.year < b.year : a.row < b.row;
            });
}

SplicedValue::SplicedValue(const Predictor& model, const ColumnMap& players,
                           std::span<const double> instance,
                           const EncodedMatrix& background)
    : model_(model),
      blocks_(players.blocks()),
      instance_(instance.begin(), instance.end()),
      background_(background) {}

double SplicedValue::Value(Coalition s) const {
  std::vector<double> row(background_.cols);
  double total = 0.0;
  for (std::size_t b = 0; b < background_.rows; ++b) {
    const auto bg = background_.row(b);
    std::copy(bg.begin(), bg.end(), row.begin());
    for (std::size_t p = 0; p < blocks_.size(); ++p) {
      if (!(s & Bit(p))) continue;
      const FeatureBlock& block = blocks_[p];
      std::copy_n(instance_.begin() + static_cast<std::ptrdiff_t>(block.first),
                  block.count,
                  row.begin() + static_cast<std::ptrdiff_t>(block.first));
    }
    total += model_.PredictProba(row);
  }
  return total / static_cast<double>(background_.rows);
}

TreeEnsembleValue::TreeEnsembleValue(const GbdtModel& model,
                                     std::span<const double> instance,
                                     const EncodedMatrix& background,
                                     OutputScale scale)
    : players_(model.columns().block_count()),
      rows_(background.rows),
      base_(model.base_score()),
      scale_(scale) {
  const std::vector<std::size_t>& owner = model.columns().column_owner();
  const std::vector<Tree>& trees = model.trees();

  // Pack trees into groups by the players they split on.
  std::vector<Coalition> tree_mask(trees.size(), 0);
  std::vector<Coalition> group_mask;
  std::vector<std::vector<std::size_t>> group_trees;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (int c : trees[t].SplitColumns()) {
      tree_mask[t] |= Bit(owner[static_cast<std::size_t>(c)]);
    }
    int best = -1;
    int best_added = 0;
    for (std::size_t g = 0; g < group_mask.size(); ++g) {
      const Coalition merged = group_mask[g] | tree_mask[t];
      if (std::popcount(merged) > kGroupPlayerCap &&
          merged != group_mask[g]) {
        continue;
      }
      const int added = std::popcount(merged) - std::popcount(group_mask[g]);
      if (best < 0 || added < best_added) {
        best = static_cast<int>(g);
        best_added = added;
      }
    }
    if (best < 0) {
      group_mask.push_back(tree_mask[t]);
      group_trees.push_back({t});
    } else {
      group_mask[static_cast<std::size_t>(best)] |= tree_mask[t];
      group_trees[static_cast<std::size_t>(best)].push_back(t);
    }
  }

  const double lr = model.learning_rate();
  groups_.resize(group_mask.size());
  std::vector<double> leaf;  // (1 << tree players) x rows
  for (std::size_t g = 0; g < group_mask.size(); ++g) {
    Group& group = groups_[g];
    for (std::size_t p = 0; p < players_; ++p) {
      if (group_mask[g] & Bit(p)) group.players.push_back(p);
    }
    const std::size_t k = group.players.size();
    const std::size_t local_count = std::size_t{1} << k;
    group.table.assign(local_count * rows_, 0.0);

    for (std::size_t t : group_trees[g]) {
      const Tree& tree = trees[t];
      // Tree-local player list and the group-local bit of each.
      std::vector<std::size_t> tree_players;
      for (std::size_t p = 0; p < players_; ++p) {
        if (tree_mask[t] & Bit(p)) tree_players.push_back(p);
      }
      const std::size_t tk = tree_players.size();
      const std::size_t tree_count = std::size_t{1} << tk;
      leaf.assign(tree_count * rows_, 0.0);
      for (std::size_t tm = 0; tm < tree_count; ++tm) {
        Coalition present = 0;
        for (std::size_t q = 0; q < tk; ++q) {
          if (tm & (std::size_t{1} << q)) present |= Bit(tree_players[q]);
        }
        for (std::size_t b = 0; b < rows_; ++b) {
          const auto bg = background.row(b);
          leaf[tm * rows_ + b] = lr * tree.Evaluate([&](std::size_t c) {
            return (present & Bit(owner[c])) ? instance[c] : bg[c];
          });
        }
      }
      std::vector<std::size_t> tree_bit_in_group(tk);
      for (std::size_t q = 0; q < tk; ++q) {
        tree_bit_in_group[q] = static_cast<std::size_t>(
            std::find(group.players.begin(), group.players.end(),
                      tree_players[q]) -
            group.players.begin());
      }
      for (std::size_t gm = 0; gm < local_count; ++gm) {
        std::size_t tm = 0;
        for (std::size_t q = 0; q < tk; ++q) {
          if (gm & (std::size_t{1} << tree_bit_in_group[q])) tm |= std::size_t{1} << q;
        }
        double* dst = group.table.data() + gm * rows_;
        const double* src = leaf.data() + tm * rows_;
        for (std::size_t b = 0; b < rows_; ++b) dst[b] += src[b];
      }
    }
  }
}

double TreeEnsembleValue::Value(Coalition s) const {
  thread_local std::vector<double> acc;
  acc.assign(rows_, base_);
  for (const Group& g : groups_) {
    std::size_t local = 0;
    for (std::size_t k = 0; k < g.players.size(); ++k) {
      if (s & Bit(g.players[k])) local |= std::size_t{1} << k;
    }
    const double* src = g.table.data() + local * rows_;
    double* dst = acc.data();
    for (std::size_t b = 0; b < rows_; ++b) dst[b] += src[b];
  }
  double total = 0.0;
  if (scale_ == OutputScale::kMargin) {
    for (double a : acc) total += a;
  } else {
    for (double a : acc) total += Sigmoid(a);
  }
  return total / static_cast<double>(rows_);
}

ShapleyRow ShapleyExact(const CoalitionValue& value) {
  const std::size_t m = value.players();
  if (m > kMaxExactPlayers) {
    throw InputError("shapley_exact: " + std::to_string(m) +
                     " players exceed the exact limit of " +
                     std::to_string(kMaxExactPlayers) + "; use sampled mode");
  }
  if (m == 0) throw InputError("shapley_exact: no players");
  const std::size_t count = std::size_t{1} << m;
  std::vector<double> v(count);
  for (std::size_t s = 0; s < count; ++s) v[s] = value.Value(s);

  // weight[s] = s!(m-s-1)!/m! = 1 / (m * C(m-1, s)).
  std::vector<double> weight(m);
  double binom = 1.0;
  for (std::size_t s = 0; s < m; ++s) {
    weight[s] = 1.0 / (static_cast<double>(m) * binom);
    binom = binom * static_cast<double>(m - 1 - s) / static_cast<double>(s + 1);
  }

  ShapleyRow out;
  out.phi.assign(m, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    const double w = weight[static_cast<std::size_t>(std::popcount(s)) < m
                                ? static_cast<std::size_t>(std::popcount(s))
                                : 0];
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t bit = std::size_t{1} << j;
      if (s & bit) continue;
      out.phi[j] += w * (v[s | bit] - v[s]);
    }
  }
  out.base_value = v[0];
  out.full_value = v[count - 1];
  return out;
}

ShapleyRow ShapleySampled(const CoalitionValue& value, int n_permutations,
                          std::uint64_t seed) {
  const std::size_t m = value.players();
  if (n_permutations < 1) throw InputError("shapley_sampled: n_permutations must be >= 1");
  if (m == 0) throw InputError("shapley_sampled: no players");
  if (m > 64) throw InputError("shapley_sampled: more than 64 players");

  std::unordered_map<Coalition, double> memo;
  auto v = [&](Coalition s) {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const double r = value.Value(s);
    memo.emplace(s, r);
    return r;
  };
  ShapleyRow out;
  out.phi.assign(m, 0.0);
  out.base_value = v(0);
  const Coalition full = m == 64 ? ~Coalition{0} : (Bit(m) - 1);
  out.full_value = v(full);

  std::size_t walks = 0;
  std::vector<std::size_t> order(m);
  auto walk = [&](auto begin, auto end) {
    Coalition s = 0;
    double prev = out.base_value;
    for (auto it = begin; it != end; ++it) {
      s |= Bit(*it);
      const double cur = v(s);
      out.phi[*it] += cur - prev;
      prev = cur;
    }
    ++walks;
  };

  double factorial = 1.0;
  for (std::size_t k = 2; k <= m; ++k) factorial *= static_cast<double>(k);
  if (m <= 10 && static_cast<double>(n_permutations) >= factorial) {
    std::iota(order.begin(), order.end(), 0);
    do {
      walk(order.begin(), order.end());
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    const int pairs = (n_permutations + 1) / 2;
    for (int p = 0; p < pairs; ++p) {
      CounterRng rng({seed, static_cast<std::uint64_t>(p)});
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = m; i > 1; --i) {
        std::swap(order[i - 1], order[rng.Below(i)]);
      }
      walk(order.begin(), order.end());
      walk(order.rbegin(), order.rend());
    }
  }
  for (double& p : out.phi) p /= static_cast<double>(walks);
  return out;
}

AttributionMatrix ExplainRows(const Predictor& model, const EncodedMatrix& instances,
                              const EncodedMatrix& background,
                              const ExplainOptions& options) {
  const ColumnMap& columns = model.columns();
  if (instances.cols != columns.size() || background.cols != columns.size()) {
    throw ShapeError("explain: instance/background width does not match the model");
  }
  if (background.rows == 0) throw InputError("explain: empty background");
  const std::size_t m = columns.block_count();
  const bool exact = options.mode == ShapleyMode::kExact ||
                     (options.mode == ShapleyMode::kAuto && m <= kMaxExactPlayers);
  if (exact && m > kMaxExactPlayers) {
    throw InputError("explain: " + std::to_string(m) +
                     " features exceed the exact limit; use sampled mode");
  }
  const auto* gbdt = dynamic_cast<const GbdtModel*>(&model);

  AttributionMatrix out;
  out.features = columns.feature_names();
  out.instance_ids.resize(instances.rows);
  std::iota(out.instance_ids.begin(), out.instance_ids.end(), 0);
  out.phi.assign(instances.rows * m, 0.0);
  out.outputs.assign(instances.rows, 0.0);
  std::vector<double> bases(instances.rows, 0.0);

  ParallelFor(instances.rows, [&](std::size_t i) {
    const auto x = instances.row(i);
    std::unique_ptr<CoalitionValue> value;
    if (gbdt != nullptr) {
      value = std::make_unique<TreeEnsembleValue>(*gbdt, x, background, options.scale);
      out.outputs[i] = options.scale == OutputScale::kMargin
                           ? gbdt->PredictMargin(x)
                           : gbdt->PredictProba(x);
    } else {
      value = std::make_unique<SplicedValue>(model, columns, x, background);
      out.outputs[i] = model.PredictProba(x);
    }
    const ShapleyRow row =
        exact ? ShapleyExact(*value)
              : ShapleySampled(*value, options.n_permutations,
                               StreamKey({options.seed, i}));
    std::copy(row.phi.begin(), row.phi.end(),
              out.phi.begin() + static_cast<std::ptrdiff_t>(i * m));
    bases[i] = row.base_value;
  });
  out.base_value = bases.empty() ? 0.0 : bases.front();
  return out;
}

AttributionMatrix Explain(const Predictor& model,
                          std::span<const LoanRecord> instances,
                          const BackgroundSet& background, const Schema& schema,
                          const ExplainOptions& options) {
  if (background.size() == 0) throw InputError("explain: empty background");
  const EncodedMatrix x = Encode(instances, schema, model.columns());
  const EncodedMatrix bg = Encode(background.records, schema, model.columns());
  AttributionMatrix out = ExplainRows(model, x, bg, options);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    out.instance_ids[i] = instances[i].row;
  }
  if (!instances.empty()) out.year = instances.front().year;
  return out;
}

ImportanceVector MeanAbsImportance(const AttributionMatrix& attrs) {
  if (attrs.rows() == 0) throw InputError("mean_abs_importance: empty attribution matrix");
  ImportanceVector v;
  v.year = attrs.year;
  v.method = attrs.method;
  v.features = attrs.features;
  v.values.assign(attrs.cols(), 0.0);
  for (std::size_t i = 0; i < attrs.rows(); ++i) {
    for (std::size_t j = 0; j < attrs.cols(); ++j) v.values[j] += std::fabs(attrs.at(i, j));
  }
  for (double& x : v.values) x /= static_cast<double>(attrs.rows());
  return v;
}

}  // namespace driftscope
