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

#include <span>
#include <vector>

#include "driftscope/model.hpp"

namespace driftscope {

struct LogisticParams {
  double l2 = 1.0;
  int max_iter = 200;
  double tol = 1e-8;
};

// L2-penalized logistic regression on internally standardized columns.
class LogisticModel : public Predictor {
 public:
  LogisticModel() = default;
  LogisticModel(std::vector<double> means, std::vector<double> scales,
                std::vector<double> weights, double intercept, ColumnMap columns,
                int iterations, double gradient_norm);

  double PredictProba(std::span<const double> row) const override;
  using Predictor::PredictProba;
  const ColumnMap& columns() const override { return columns_; }
  std::string kind() const override { return "logistic"; }

  // Weights on the original (unstandardized) column scale.
  std::vector<double> coefficients() const;
  double intercept() const;
  // Weights on the standardized scale, as fitted.
  const std::vector<double>& standardized_weights() const { return weights_; }
  int iterations() const { return iterations_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  std::vector<double> means_;
  std::vector<double> scales_;
  std::vector<double> weights_;
  double intercept_ = 0.0;
  ColumnMap columns_;
  int iterations_ = 0;
  double gradient_norm_ = 0.0;
};

// Newton/IRLS. The intercept is not penalized. Convergence needs both
// ||gradient|| <= tol * n and a vanishing Newton step; otherwise (e.g.
// separable data with l2 == 0) throws ConvergenceError carrying the final
// gradient norm.
LogisticModel FitLogistic(const EncodedMatrix& train, std::span<const int> labels,
                          const LogisticParams& params = {});

}  // namespace driftscope
