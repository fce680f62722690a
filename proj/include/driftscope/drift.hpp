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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "driftscope/schema.hpp"

namespace driftscope {

// Histogram bins derived from baseline quantiles. Bins are right-closed:
// value v falls in bin i when edges[i] < v <= edges[i + 1], with the outer
// edges at -inf / +inf.
struct BinSpec {
  std::vector<double> edges;
  double epsilon = 1e-6;

  std::size_t bins() const { return edges.size() - 1; }
  std::size_t BinOf(double v) const;
  std::vector<double> Histogram(std::span<const double> values) const;
};

// Interior edges are the j/k empirical quantiles (linear interpolation),
// with duplicates and edges at or above the sample maximum removed.
// Throws InputError for an empty sample or k == 0.
BinSpec QuantileBins(std::span<const double> baseline, std::size_t k,
                     double epsilon = 1e-6);

// Population stability index with natural log over epsilon-smoothed
// proportions. Throws ShapeError when bin counts differ.
double Psi(std::span<const double> p_counts, std::span<const double> q_counts,
           double epsilon = 1e-6);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value at effective
// n = nx*ny/(nx+ny). Approximate for small samples (n < 35).
KsResult KsTwoSample(std::span<const double> xs, std::span<const double> ys);

// Base-2 Jensen-Shannon divergence of two proportion vectors (0 log 0 = 0).
double JsDivergence(std::span<const double> p, std::span<const double> q);

struct ChiSquareResult {
  double chi2 = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

// Pearson chi-square test of independence on an r x c table, without
// continuity correction. Throws DegenerateError on a zero row/column.
ChiSquareResult ChiSquareIndependence(
    const std::vector<std::vector<double>>& table);

struct DriftThresholds {
  double psi = 0.25;
  double chi2_alpha = 0.05;
  std::size_t bins = 10;
  double epsilon = 1e-6;
};

struct FeatureDrift {
  std::string feature;
  FeatureKind kind = FeatureKind::kNumeric;
  // Numeric features.
  double psi = 0.0;
  double ks_stat = 0.0;
  double ks_p = 1.0;
  // Categorical features.
  double js = 0.0;
  double chi2 = 0.0;
  double chi2_p = 1.0;
  int chi2_dof = 0;
  bool drift = false;

  // PSI for numerics, JS for categoricals.
  double score() const { return kind == FeatureKind::kNumeric ? psi : js; }
};

struct DriftReport {
  int baseline_year = 0;
  int target_year = 0;
  std::vector<FeatureDrift> features;
  double label_rate_delta = 0.0;

  const FeatureDrift& Feature(std::string_view name) const;
};

// Compares two record sets feature by feature. Bins always come from the
// baseline records. `features` selects schema indices (all when empty).
DriftReport MakeDriftReport(std::span<const LoanRecord> baseline,
                            std::span<const LoanRecord> target,
                            const Schema& schema,
                            const DriftThresholds& thresholds, int baseline_year,
                            int target_year,
                            std::vector<std::size_t> features = {});

}  // namespace driftscope
