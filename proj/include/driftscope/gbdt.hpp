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

struct GbdtParams {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double min_leaf = 20.0;
  double subsample = 0.8;
  double lambda = 1.0;
  std::uint64_t seed = 7;
};

// Gradient-boosted trees for log-loss. The margin is
// base_score + learning_rate * sum of tree leaf values.
class GbdtModel : public Predictor {
 public:
  GbdtModel() = default;
  GbdtModel(double base_score, double learning_rate, std::vector<Tree> trees,
            ColumnMap columns);

  double PredictMargin(std::span<const double> row) const;
  double PredictProba(std::span<const double> row) const override;
  using Predictor::PredictProba;
  const ColumnMap& columns() const override { return columns_; }
  std::string kind() const override { return "gbdt"; }

  double base_score() const { return base_score_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<Tree>& trees() const { return trees_; }

  // Training-set log-loss after each round (entry 0 = prior only).
  const std::vector<double>& training_loss() const { return training_loss_; }
  void set_training_loss(std::vector<double> loss) { training_loss_ = std::move(loss); }

 private:
  double base_score_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<Tree> trees_;
  ColumnMap columns_;
  std::vector<double> training_loss_;
};

// Throws DegenerateError when labels hold a single class and ConfigError for
// invalid parameters.
GbdtModel FitGbdt(const EncodedMatrix& train, std::span<const int> labels,
                  const GbdtParams& params = {});

}  // namespace driftscope
