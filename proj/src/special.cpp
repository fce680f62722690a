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

#include "driftscope/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "driftscope/errors.hpp"

namespace driftscope {
namespace {

double Clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double ChiSquareSurvival(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return Clamp01(boost::math::gamma_q(0.5 * dof, 0.5 * x));
}

double StudentTTwoSided(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const boost::math::students_t dist(dof);
  return Clamp01(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

double FisherFSurvival(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  if (!std::isfinite(f)) return 0.0;
  const boost::math::fisher_f dist(d1, d2);
  return Clamp01(boost::math::cdf(boost::math::complement(dist, f)));
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double KolmogorovSurvival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
  if (lambda < 1.18) {
    // Jacobi-transformed series; converges fast for small lambda.
    const double y = std::exp(-kPi2 / (8.0 * lambda * lambda));
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double e = static_cast<double>((2 * k - 1) * (2 * k - 1));
      s += std::pow(y, e);
    }
    return Clamp01(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return Clamp01(2.0 * s);
}

double SortedQuantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile level must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace driftscope
