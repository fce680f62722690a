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
#include <span>
#include <vector>

#include "driftscope/model.hpp"
#include "driftscope/tree.hpp"

namespace driftscope {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 8;
  double min_leaf = 5.0;
  // Bootstrap rows per tree.
  bool bootstrap = true;
  // Draw round(sqrt(columns)) candidate columns at every node.
  bool feature_subsample = true;
  std::uint64_t seed = 11;
};

// Bagged CART trees; each leaf stores its (bootstrap-weighted) default rate
// and the forest averages them.
class ForestModel : public Predictor {
 public:
  ForestModel() = default;
  ForestModel(std::vector<Tree> trees, ColumnMap columns);

  double PredictProba(std::span<const double> row) const override;
  using Predictor::PredictProba;
  const ColumnMap& columns() const override { return columns_; }
  std::string kind() const override { return "forest"; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  std::vector<Tree> trees_;
  ColumnMap columns_;
};

// One variance-reduction (Gini-equivalent for 0/1 labels) tree.
Tree FitClassificationTree(const EncodedMatrix& train, std::span<const int> labels,
                           std::span<const double> weights, int max_depth,
                           double min_leaf, const ColumnFilter& filter = {});

ForestModel FitRandomForest(const EncodedMatrix& train, std::span<const int> labels,
                            const ForestParams& params = {});

}  // namespace driftscope
