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

#include "driftscope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "driftscope/errors.hpp"

namespace driftscope {
namespace {

void CheckLengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a) +
                     " scores vs " + std::to_string(b) + " labels");
  }
}

}  // namespace

double Auc(std::span<const double> scores, std::span<const int> labels) {
  CheckLengths(scores.size(), labels.size(), "auc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] != 0) {
        rank_sum_pos += avg_rank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw DegenerateError("auc: both classes must be present");
  }
  return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

ModelMetrics ClassificationMetrics(std::span<const double> scores,
                                   std::span<const int> labels,
                                   double threshold) {
  ModelMetrics m;
  m.threshold = threshold;
  m.auc = Auc(scores, labels);
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] != 0;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  m.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  m.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double LogLossFromMargins(std::span<const double> margins,
                          std::span<const int> labels) {
  CheckLengths(margins.size(), labels.size(), "log_loss");
  double s = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    // log(1 + exp(-y*m)) with y in {-1, +1}, computed stably.
    const double z = labels[i] != 0 ? margins[i] : -margins[i];
    s += z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return s / static_cast<double>(margins.size());
}

}  // namespace driftscope
