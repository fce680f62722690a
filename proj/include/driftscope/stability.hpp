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
#include <string>
#include <vector>

#include "driftscope/shapley.hpp"

namespace driftscope {

struct CosineResult {
  double value = 0.0;
  bool degenerate = false;  // one side was the zero vector
};

// u.v / (|u| |v|). A zero vector on one side yields 0 with the degenerate
// flag; both zero throws DegenerateError. Length mismatch throws ShapeError.
CosineResult CosineSimilarity(std::span<const double> u, std::span<const double> v);

// Tau-b with tie correction. Throws DegenerateError when either side is
// constant and InputError for fewer than two entries.
double KendallTauB(std::span<const double> u, std::span<const double> v);

// Indices of the k largest values; ties go to the lexicographically
// smaller name.
std::vector<std::size_t> TopK(std::span<const double> values,
                              const std::vector<std::string>& names,
                              std::size_t k);

// |top_k(u) & top_k(v)| / |top_k(u) | top_k(v)|. Throws InputError when k
// exceeds the feature count or is 0.
double JaccardTopK(std::span<const double> u, std::span<const double> v,
                   const std::vector<std::string>& names, std::size_t k = 10);

struct StabilityPoint {
  int year_from = 0;
  int year_to = 0;
  double cosine = 0.0;
  bool cosine_degenerate = false;
  double kendall_tau = 0.0;
  double jaccard = 0.0;
};

struct StabilitySeries {
  std::string method;
  std::size_t k = 10;
  std::vector<StabilityPoint> points;

  std::vector<double> cosines() const;
  std::vector<double> taus() const;
  std::vector<double> jaccards() const;
};

// One metric triple per consecutive pair of vectors (input must be in year
// order). Throws ShapeError when feature sets differ, InputError for fewer
// than two vectors.
StabilitySeries ComputeStabilitySeries(const std::vector<ImportanceVector>& vectors,
                                       std::size_t k = 10);

}  // namespace driftscope
