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

namespace driftscope {

struct ModelMetrics {
  double auc = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.5;
};

// Mann-Whitney AUC with average ranks for ties. Throws DegenerateError
// unless both classes are present.
double Auc(std::span<const double> scores, std::span<const int> labels);

// Precision/recall/F1 at `threshold` (positive when score >= threshold),
// plus AUC. Precision is 0 when nothing is predicted positive.
ModelMetrics ClassificationMetrics(std::span<const double> scores,
                                   std::span<const int> labels,
                                   double threshold = 0.5);

// Mean binary log-loss of sigmoid(margins).
double LogLossFromMargins(std::span<const double> margins,
                          std::span<const int> labels);

}  // namespace driftscope
