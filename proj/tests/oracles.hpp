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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

// Independent reference implementations shared by the unit tests and the
// acceptance runner. None of them call into the library.
namespace driftscope::oracles {

// Sup of |F_x - F_y| evaluated at every pooled point.
inline double BruteKs(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> pooled = xs;
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  double best = 0.0;
  for (double t : pooled) {
    const double fx = static_cast<double>(std::count_if(
                          xs.begin(), xs.end(), [&](double v) { return v <= t; })) /
                      static_cast<double>(xs.size());
    const double fy = static_cast<double>(std::count_if(
                          ys.begin(), ys.end(), [&](double v) { return v <= t; })) /
                      static_cast<double>(ys.size());
    best = std::max(best, std::abs(fx - fy));
  }
  return best;
}

// Q(l) = 2 sum_k (-1)^(k-1) exp(-2 k^2 l^2), clamped to [0, 1].
inline double KolmogorovSeries(double lambda) {
  double q = 0.0;
  for (int k = 1; k < 200; ++k) {
    q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(q, 0.0, 1.0);
}

// Exact two-sided Wilcoxon signed-rank p by enumerating every sign
// assignment over the average ranks of the nonzero differences. Ranks are
// doubled so tied ranks stay integral.
inline double BruteWilcoxonP(const std::vector<double>& d) {
  std::vector<double> nz;
  for (double v : d) {
    if (v != 0.0) nz.push_back(v);
  }
  const std::size_t n = nz.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(nz[a]) < std::abs(nz[b]); });
  std::vector<long> twice_rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(nz[order[j]]) == std::abs(nz[order[i]])) ++j;
    for (std::size_t k = i; k < j; ++k) twice_rank[order[k]] = static_cast<long>(i + j + 1);
    i = j;
  }
  long w_plus = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += twice_rank[i];
    if (nz[i] > 0) w_plus += twice_rank[i];
  }
  const long w = std::min(w_plus, total - w_plus);
  std::uint64_t at_most = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    long s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1U) s += twice_rank[i];
    }
    if (s <= w) ++at_most;
  }
  return std::min(1.0, 2.0 * static_cast<double>(at_most) /
                           static_cast<double>(std::uint64_t{1} << n));
}

}  // namespace driftscope::oracles
