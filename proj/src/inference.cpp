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
#include "driftscope/inference.hpp"

#include <algorithm>
#include <cmath>

#include "driftscope/errors.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/rng.hpp"
#include "driftscope/special.hpp"

namespace driftscope {
namespace {

std::vector<double> Differences(std::span<const double> a, std::span<const double> b,
                                const char* who) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(who) + ": series differ in length (" +
                     std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double Mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

IntervalEstimate PairedBootstrapCi(std::span<const double> a, std::span<const double> b,
                                   int resamples, double level, std::uint64_t seed) {
  const std::vector<double> d = Differences(a, b, "paired_bootstrap_ci");
  if (d.size() < 2) throw InputError("paired_bootstrap_ci: need at least two pairs");
  if (resamples < 1) throw InputError("paired_bootstrap_ci: resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw InputError("paired_bootstrap_ci: level must lie in (0, 1)");
  IntervalEstimate out;
  out.level = level;
  out.resamples = resamples;
  out.seed = seed;
  out.point = Mean(d);
  const auto n = d.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  ParallelFor(means.size(), [&](std::size_t r) {
    CounterRng rng({seed, r});
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d[rng.Below(n)];
    means[r] = s / static_cast<double>(n);
  });
  std::sort(means.begin(), means.end());
  out.ci_lo = SortedQuantile(means, (1.0 - level) / 2.0);
  out.ci_hi = SortedQuantile(means, (1.0 + level) / 2.0);
  return out;
}

TestResult WilcoxonSignedRank(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d = Differences(a, b, "wilcoxon");
  std::erase(d, 0.0);
  if (d.empty()) throw DegenerateError("wilcoxon: every difference is zero");
  const std::size_t n = d.size();

  // Doubled average ranks of |d| are integers.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return std::fabs(d[x]) < std::fabs(d[y]); });
  std::vector<long long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    const auto r2 = static_cast<long long>(i + 1 + j + 1);  // 2 * mean rank
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const auto t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  long long w_plus2 = 0;
  long long total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0) w_plus2 += rank2[i];
  }
  const long long w2 = std::min(w_plus2, total2 - w_plus2);

  TestResult r;
  r.kind = "wilcoxon";
  r.n = n;
  r.statistic = static_cast<double>(w2) / 2.0;
  if (n <= kWilcoxonExactMax) {
    // counts[s] = number of sign assignments with doubled W+ == s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    long long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (long long s = reach; s >= 0; --s) {
        const auto src = static_cast<std::size_t>(s);
        if (counts[src] != 0.0) counts[src + static_cast<std::size_t>(rank2[i])] += counts[src];
      }
      reach += rank2[i];
    }
    double tail = 0.0;
    for (long long s = 0; s <= w2; ++s) tail += counts[static_cast<std::size_t>(s)];
    r.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
    r.p_method = "exact";
  } else {
    const auto nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double dev = std::max(0.0, std::fabs(r.statistic - mean) - 0.5);
    r.p_value = var > 0.0 ? std::min(1.0, 2.0 * NormalCdf(-dev / std::sqrt(var))) : 1.0;
    r.p_method = "normal-approx";
  }
  return r;
}

TestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  const std::vector<double> d = Differences(a, b, "paired_t_test");
  if (d.size() < 2) throw InputError("paired_t_test: need at least two pairs");
  const auto n = static_cast<double>(d.size());
  const double mean = Mean(d);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double var = ss / (n - 1.0);
  if (!(var > 1e-24 * std::max(1.0, mean * mean))) {
    throw DegenerateError("paired_t_test: differences have zero variance");
  }
  TestResult r;
  r.kind = "paired-t";
  r.n = d.size();
  r.statistic = mean / std::sqrt(var / n);
  r.p_value = StudentTTwoSided(r.statistic, n - 1.0);
  r.p_method = "t-distribution";
  return r;
}

double PearsonCorrelation(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("pearson: vectors differ in length");
  if (u.size() < 2) throw InputError("pearson: need at least two entries");
  const double mu = Mean(u);
  const double mv = Mean(v);
  double suv = 0.0;
  double suu = 0.0;
  double svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suv += (u[i] - mu) * (v[i] - mv);
    suu += (u[i] - mu) * (u[i] - mu);
    svv += (v[i] - mv) * (v[i] - mv);
  }
  if (suu == 0.0 || svv == 0.0) throw DegenerateError("pearson: constant vector");
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

std::vector<YearCorrelation> ConsecutiveYearCorrelation(
    const std::vector<ImportanceVector>& vectors) {
  if (vectors.size() < 2) throw InputError("temporal correlation: need at least two years");
  std::vector<YearCorrelation> out;
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    if (vectors[i].features != vectors[i - 1].features) {
      throw ShapeError("temporal correlation: feature sets differ");
    }
    out.push_back({vectors[i - 1].year, vectors[i].year,
                   PearsonCorrelation(vectors[i - 1].values, vectors[i].values)});
  }
  return out;
}

double SampleSkewness(std::span<const double> x) {
  if (x.size() < 3) return 0.0;
  const double m = Mean(x);
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  const auto n = static_cast<double>(x.size());
  m2 /= n;
  m3 /= n;
  if (!(m2 > 0.0)) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

}  // namespace driftscope
