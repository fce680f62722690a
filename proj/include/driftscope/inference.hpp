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
#include <string>
#include <vector>

#include "driftscope/shapley.hpp"

namespace driftscope {

struct IntervalEstimate {
  double point = 0.0;  // mean of a - b
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double level = 0.95;
  int resamples = 1000;
  std::uint64_t seed = 0;
};

// Percentile bootstrap of the mean paired difference. Deterministic in
// (inputs, resamples, seed) regardless of thread count.
IntervalEstimate PairedBootstrapCi(std::span<const double> a, std::span<const double> b,
                                   int resamples = 1000, double level = 0.95,
                                   std::uint64_t seed = 29);

struct TestResult {
  std::string kind;      // "paired-t" or "wilcoxon"
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;     // after zero removal for wilcoxon
  std::string p_method;  // "exact", "normal-approx" or "t-distribution"
};

inline constexpr std::size_t kWilcoxonExactMax = 25;

// W = min(W+, W-) with average ranks for tied |d|. Two-sided p is
// 2 * P(W+ <= W) under the null, capped at 1: exact enumeration for
// n <= 25, else normal approximation with tie-corrected variance and
// continuity correction. Throws DegenerateError if every difference is 0.
TestResult WilcoxonSignedRank(std::span<const double> a, std::span<const double> b);

// Throws DegenerateError for zero-variance differences, InputError for
// n < 2.
TestResult PairedTTest(std::span<const double> a, std::span<const double> b);

// Pearson r. Throws DegenerateError when either side is constant.
double PearsonCorrelation(std::span<const double> u, std::span<const double> v);

struct YearCorrelation {
  int year_from = 0;
  int year_to = 0;
  double r = 0.0;
};

// Pearson r between consecutive importance vectors (input in year order).
std::vector<YearCorrelation> ConsecutiveYearCorrelation(
    const std::vector<ImportanceVector>& vectors);

// Population-moment skewness m3 / m2^1.5; 0 for fewer than three values or
// zero variance.
double SampleSkewness(std::span<const double> x);

}  // namespace driftscope
