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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "driftscope/encoding.hpp"

namespace driftscope {

// Anything that maps an encoded row to a score. Classifiers return the
// default probability; test fixtures may return an arbitrary real.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual double PredictProba(std::span<const double> row) const = 0;
  virtual const ColumnMap& columns() const = 0;
  virtual std::string kind() const = 0;

  // Throws ShapeError when the matrix width differs from columns().size().
  std::vector<double> PredictProba(const EncodedMatrix& x) const;

 protected:
  void CheckWidth(std::size_t width) const;
};

inline double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace driftscope
