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
#include "driftscope/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftscope/errors.hpp"

namespace driftscope {

CosineResult CosineSimilarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("cosine: vectors differ in length");
  if (u.empty()) throw InputError("cosine: empty vectors");
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 && vv == 0.0) throw DegenerateError("cosine: both vectors are zero");
  if (uu == 0.0 || vv == 0.0) return {0.0, true};
  const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  return {std::clamp(c, -1.0, 1.0), false};
}

double KendallTauB(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("kendall_tau: vectors differ in length");
  const std::size_t n = u.size();
  if (n < 2) throw InputError("kendall_tau: need at least two entries");
  long long concordant = 0;
  long long discordant = 0;
  long long ties_u = 0;
  long long ties_v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double du = u[i] - u[j];
      const double dv = v[i] - v[j];
      if (du == 0.0) ++ties_u;
      if (dv == 0.0) ++ties_v;
      if (du == 0.0 || dv == 0.0) continue;
      ((du > 0) == (dv > 0) ? concordant : discordant) += 1;
    }
  }
  const auto pairs = static_cast<long long>(n * (n - 1) / 2);
  if (ties_u == pairs || ties_v == pairs) {
    throw DegenerateError("kendall_tau: a vector is constant");
  }
  const double denom = std::sqrt(static_cast<double>(pairs - ties_u)) *
                       std::sqrt(static_cast<double>(pairs - ties_v));
  return static_cast<double>(concordant - discordant) / denom;
}

std::vector<std::size_t> TopK(std::span<const double> values,
                              const std::vector<std::string>& names,
                              std::size_t k) {
  if (names.size() != values.size()) throw ShapeError("top_k: names and values differ in length");
  if (k == 0 || k > values.size()) {
    throw InputError("top_k: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(values.size()) + "]");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return names[a] < names[b];
  });
  order.resize(k);
  return order;
}

double JaccardTopK(std::span<const double> u, std::span<const double> v,
                   const std::vector<std::string>& names, std::size_t k) {
  if (u.size() != v.size()) throw ShapeError("jaccard: vectors differ in length");
  std::vector<std::size_t> a = TopK(u, names, k);
  std::vector<std::size_t> b = TopK(v, names, k);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(common));
  const std::size_t uni = a.size() + b.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

namespace {

std::vector<double> Column(const std::vector<StabilityPoint>& points,
                           double StabilityPoint::*field) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const StabilityPoint& p : points) out.push_back(p.*field);
  return out;
}

}  // namespace

std::vector<double> StabilitySeries::cosines() const {
  return Column(points, &StabilityPoint::cosine);
}
std::vector<double> StabilitySeries::taus() const {
  return Column(points, &StabilityPoint::kendall_tau);
}
std::vector<double> StabilitySeries::jaccards() const {
  return Column(points, &StabilityPoint::jaccard);
}

StabilitySeries ComputeStabilitySeries(const std::vector<ImportanceVector>& vectors,
                                       std::size_t k) {
  if (vectors.size() < 2) throw InputError("stability_series: need at least two years");
  StabilitySeries out;
  out.method = vectors.front().method;
  out.k = k;
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    const ImportanceVector& a = vectors[i - 1];
    const ImportanceVector& b = vectors[i];
    if (a.features != b.features || a.values.size() != a.features.size() ||
        b.values.size() != b.features.size()) {
      throw ShapeError("stability_series: feature sets differ between " +
                       std::to_string(a.year) + " and " + std::to_string(b.year));
    }
    StabilityPoint p;
    p.year_from = a.year;
    p.year_to = b.year;
    const CosineResult c = CosineSimilarity(a.values, b.values);
    p.cosine = c.value;
    p.cosine_degenerate = c.degenerate;
    p.kendall_tau = KendallTauB(a.values, b.values);
    p.jaccard = JaccardTopK(a.values, b.values, a.features, k);
    out.points.push_back(p);
  }
  return out;
}

}  // namespace driftscope
