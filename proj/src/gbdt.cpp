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

#include "driftscope/gbdt.hpp"

#include <cmath>

#include "driftscope/errors.hpp"
#include "driftscope/metrics.hpp"
#include "driftscope/rng.hpp"

namespace driftscope {

std::vector<double> Predictor::PredictProba(const EncodedMatrix& x) const {
  CheckWidth(x.cols);
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = PredictProba(x.row(i));
  return out;
}

void Predictor::CheckWidth(std::size_t width) const {
  if (width != columns().size()) {
    throw ShapeError(kind() + " model expects " +
                     std::to_string(columns().size()) + " columns, got " +
                     std::to_string(width));
  }
}

GbdtModel::GbdtModel(double base_score, double learning_rate,
                     std::vector<Tree> trees, ColumnMap columns)
    : base_score_(base_score),
      learning_rate_(learning_rate),
      trees_(std::move(trees)),
      columns_(std::move(columns)) {}

double GbdtModel::PredictMargin(std::span<const double> row) const {
  CheckWidth(row.size());
  double sum = 0.0;
  for (const Tree& t : trees_) sum += t.Predict(row);
  return base_score_ + learning_rate_ * sum;
}

double GbdtModel::PredictProba(std::span<const double> row) const {
  return Sigmoid(PredictMargin(row));
}

GbdtModel FitGbdt(const EncodedMatrix& train, std::span<const int> labels,
                  const GbdtParams& params) {
  if (labels.size() != train.rows) {
    throw ShapeError("fit_gbdt: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(train.rows) + " rows");
  }
  if (params.n_trees < 0 || params.max_depth < 0 ||
      !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) ||
      !(params.subsample > 0.0 && params.subsample <= 1.0) ||
      params.lambda < 0.0 || params.min_leaf < 1.0) {
    throw ConfigError("fit_gbdt: invalid parameters");
  }
  double positives = 0.0;
  for (int y : labels) positives += (y != 0);
  const auto n = static_cast<double>(labels.size());
  if (positives == 0.0 || positives == n) {
    throw DegenerateError("fit_gbdt: labels contain a single class");
  }
  const double prevalence = positives / n;
  const double base = std::log(prevalence / (1.0 - prevalence));

  const SortedColumns sorted(train);
  std::vector<double> margin(train.rows, base);
  std::vector<double> grad(train.rows);
  std::vector<double> hess(train.rows);
  std::vector<double> weight(train.rows, 1.0);
  std::vector<double> loss_history;
  loss_history.push_back(LogLossFromMargins(margin, labels));

  const SplitParams split{params.max_depth, params.lambda, params.min_leaf, 0.0};
  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int round = 0; round < params.n_trees; ++round) {
    for (std::size_t i = 0; i < train.rows; ++i) {
      const double p = Sigmoid(margin[i]);
      grad[i] = p - static_cast<double>(labels[i] != 0);
      hess[i] = p * (1.0 - p);
      if (params.subsample < 1.0) {
        CounterRng rng({params.seed, static_cast<std::uint64_t>(round), i});
        weight[i] = rng.Uniform() < params.subsample ? 1.0 : 0.0;
      }
    }
    Tree tree = GrowTree(train, sorted, grad, hess, weight, split);
    for (std::size_t i = 0; i < train.rows; ++i) {
      margin[i] += params.learning_rate * tree.Predict(train.row(i));
    }
    trees.push_back(std::move(tree));
    loss_history.push_back(LogLossFromMargins(margin, labels));
  }
  GbdtModel model(base, params.learning_rate, std::move(trees), train.columns);
  model.set_training_loss(std::move(loss_history));
  return model;
}

}  // namespace driftscope
