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

// Tail probabilities used by the tests in drift.hpp, fairness.hpp and
// inference.hpp. Results are clamped to [0, 1].

// P(X >= x) for X ~ chi^2(dof); regularized upper incomplete gamma.
double ChiSquareSurvival(double x, double dof);
// Two-sided P(|T| >= |t|) for Student's t with dof degrees of freedom.
double StudentTTwoSided(double t, double dof);
// P(F >= f) for F(d1, d2).
double FisherFSurvival(double f, double d1, double d2);
// Standard normal CDF.
double NormalCdf(double z);
// Asymptotic Kolmogorov survival Q(lambda) = P(sqrt(n) D > lambda).
double KolmogorovSurvival(double lambda);

// Linear-interpolation quantile (position q*(n-1)) of an ascending sample.
// Throws InputError for an empty sample or q outside [0, 1].
double SortedQuantile(std::span<const double> sorted, double q);

}  // namespace driftscope
