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

#include "driftscope/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "driftscope/errors.hpp"

namespace driftscope {

namespace {
// Logit margin beyond which every fitted probability is within 1e-13 of
// its label.
constexpr double kSeparationMargin = 30.0;
}  // namespace

LogisticModel::LogisticModel(std::vector<double> means,
                             std::vector<double> scales,
                             std::vector<double> weights, double intercept,
                             ColumnMap columns, int iterations,
                             double gradient_norm)
    : means_(std::move(means)),
      scales_(std::move(scales)),
      weights_(std::move(weights)),
      intercept_(intercept),
      columns_(std::move(columns)),
      iterations_(iterations),
      gradient_norm_(gradient_norm) {}

double LogisticModel::PredictProba(std::span<const double> row) const {
  CheckWidth(row.size());
  double z = intercept_;
  for (std::size_t j = 0; j < row.size(); ++j) {
    z += weights_[j] * (row[j] - means_[j]) / scales_[j];
  }
  return Sigmoid(z);
}

std::vector<double> LogisticModel::coefficients() const {
  std::vector<double> out(weights_.size());
  for (std::size_t j = 0; j < weights_.size(); ++j) out[j] = weights_[j] / scales_[j];
  return out;
}

double LogisticModel::intercept() const {
  double b = intercept_;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    b -= weights_[j] * means_[j] / scales_[j];
  }
  return b;
}

LogisticModel FitLogistic(const EncodedMatrix& train, std::span<const int> labels,
                          const LogisticParams& params) {
  const std::size_t n = train.rows;
  const std::size_t d = train.cols;
  if (labels.size() != n) throw ShapeError("fit_logistic: label count mismatch");
  double positives = 0.0;
  for (int y : labels) positives += (y != 0);
  if (positives == 0.0 || positives == static_cast<double>(n)) {
    throw DegenerateError("fit_logistic: labels contain a single class");
  }
  if (params.l2 < 0.0 || params.max_iter < 1 || !(params.tol > 0.0)) {
    throw ConfigError("fit_logistic: invalid parameters");
  }

  std::vector<double> means(d, 0.0);
  std::vector<double> scales(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) means[j] += train.at(i, j);
    means[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = train.at(i, j) - means[j];
      scales[j] += c * c;
    }
    scales[j] = std::sqrt(scales[j] / static_cast<double>(n));
    if (!(scales[j] > 0.0)) scales[j] = 1.0;
  }

  // Column 0 is the intercept.
  Eigen::MatrixXd x(n, d + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      x(i, j + 1) = (train.at(i, j) - means[j]) / scales[j];
    }
    y(i) = labels[i] != 0 ? 1.0 : 0.0;
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, params.l2);
  penalty(0) = 0.0;

  const double step_tol = std::sqrt(params.tol);
  double grad_norm = 0.0;
  for (int it = 1; it <= params.max_iter; ++it) {
    const Eigen::VectorXd z = x * theta;
    Eigen::VectorXd p(n);
    Eigen::VectorXd w(n);
    for (std::size_t i = 0; i < n; ++i) {
      p(i) = Sigmoid(z(i));
      const double e = std::exp(-std::fabs(z(i)));
      w(i) = e / ((1.0 + e) * (1.0 + e));
    }
    const Eigen::VectorXd grad =
        x.transpose() * (p - y) + penalty.cwiseProduct(theta);
    grad_norm = grad.norm();
    Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
    hess.diagonal() += penalty;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    const Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() ||
        !std::isfinite(grad_norm)) {
      throw ConvergenceError("fit_logistic: Newton system became singular "
                             "(final gradient norm " +
                             std::to_string(grad_norm) + ")");
    }
    theta -= step;
    if (grad_norm <= params.tol * static_cast<double>(n) &&
        step.cwiseAbs().maxCoeff() <= step_tol) {
      // Without a penalty, a fit that classifies every row with a huge
      // margin has stalled on the way to infinite weights (separable data).
      if (params.l2 == 0.0) {
        const Eigen::VectorXd zf = x * theta;
        double min_margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          min_margin = std::min(min_margin, (2.0 * y(i) - 1.0) * zf(i));
        }
        if (min_margin > kSeparationMargin) {
          throw ConvergenceError(
              "fit_logistic: weights diverge on separable data without a penalty "
              "(final gradient norm " +
              std::to_string(grad_norm) + ")");
        }
      }
      std::vector<double> weights(d);
      for (std::size_t j = 0; j < d; ++j) weights[j] = theta(j + 1);
      return LogisticModel(std::move(means), std::move(scales), std::move(weights),
                           theta(0), train.columns, it, grad_norm);
    }
  }
  throw ConvergenceError("fit_logistic: no convergence in " +
                         std::to_string(params.max_iter) +
                         " iterations (final gradient norm " +
                         std::to_string(grad_norm) + ")");
}

}  // namespace driftscope
