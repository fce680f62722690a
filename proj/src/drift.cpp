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

#include "driftscope/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftscope/errors.hpp"
#include "driftscope/special.hpp"

namespace driftscope {

std::size_t BinSpec::BinOf(double v) const {
  // First interior edge >= v.
  const auto begin = edges.begin() + 1;
  const auto end = edges.end() - 1;
  return static_cast<std::size_t>(std::lower_bound(begin, end, v) - begin);
}

std::vector<double> BinSpec::Histogram(std::span<const double> values) const {
  std::vector<double> counts(bins(), 0.0);
  for (double v : values) counts[BinOf(v)] += 1.0;
  return counts;
}

BinSpec QuantileBins(std::span<const double> baseline, std::size_t k,
                     double epsilon) {
  if (baseline.empty()) throw InputError("quantile_bins: empty sample");
  if (k == 0) throw InputError("quantile_bins: bin count must be positive");
  std::vector<double> sorted(baseline.begin(), baseline.end());
  std::sort(sorted.begin(), sorted.end());
  const double max_value = sorted.back();
  const auto n = static_cast<double>(sorted.size());

  BinSpec spec;
  spec.epsilon = epsilon;
  spec.edges.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t j = 1; j < k; ++j) {
    const double h = (n - 1.0) * static_cast<double>(j) / static_cast<double>(k);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double edge = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    if (edge >= max_value) continue;
    if (spec.edges.size() > 1 && edge <= spec.edges.back()) continue;
    spec.edges.push_back(edge);
  }
  spec.edges.push_back(std::numeric_limits<double>::infinity());
  return spec;
}

namespace {

std::vector<double> Smoothed(std::span<const double> counts, double epsilon) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (!(total > 0.0)) throw InputError("psi: histogram total must be positive");
  std::vector<double> p(counts.size());
  const double norm = 1.0 + epsilon * static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = (counts[i] / total + epsilon) / norm;
  }
  return p;
}

}  // namespace

double Psi(std::span<const double> p_counts, std::span<const double> q_counts,
           double epsilon) {
  if (p_counts.size() != q_counts.size()) {
    throw ShapeError("psi: histograms have " + std::to_string(p_counts.size()) +
                     " and " + std::to_string(q_counts.size()) + " bins");
  }
  const std::vector<double> p = Smoothed(p_counts, epsilon);
  const std::vector<double> q = Smoothed(q_counts, epsilon);
  double psi = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    psi += (p[i] - q[i]) * std::log(p[i] / q[i]);
  }
  return std::max(psi, 0.0);
}

KsResult KsTwoSample(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw InputError("ks_two_sample: empty sample");
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult out;
  out.statistic = d;
  const double ne = na * nb / (na + nb);
  out.p_value = KolmogorovSurvival(std::sqrt(ne) * d);
  return out;
}

double JsDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ShapeError("js_divergence: category counts differ (" +
                     std::to_string(p.size()) + " vs " +
                     std::to_string(q.size()) + ")");
  }
  double sp = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw InputError("js_divergence: negative proportion");
    sp += p[i];
    sq += q[i];
  }
  if (std::fabs(sp - 1.0) > 1e-9 || std::fabs(sq - 1.0) > 1e-9) {
    throw InputError("js_divergence: proportions must sum to 1");
  }
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) js += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) js += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

ChiSquareResult ChiSquareIndependence(
    const std::vector<std::vector<double>>& table) {
  const std::size_t r = table.size();
  if (r < 2) throw DegenerateError("chi_square: need at least 2 rows");
  const std::size_t c = table[0].size();
  if (c < 2) throw DegenerateError("chi_square: need at least 2 columns");
  std::vector<double> row_sum(r, 0.0);
  std::vector<double> col_sum(c, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (table[i].size() != c) throw ShapeError("chi_square: ragged table");
    for (std::size_t j = 0; j < c; ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
      total += table[i][j];
    }
  }
  for (std::size_t i = 0; i < r; ++i) {
    if (!(row_sum[i] > 0.0)) throw DegenerateError("chi_square: zero-marginal row " + std::to_string(i));
  }
  for (std::size_t j = 0; j < c; ++j) {
    if (!(col_sum[j] > 0.0)) throw DegenerateError("chi_square: zero-marginal column " + std::to_string(j));
  }
  ChiSquareResult out;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double e = row_sum[i] * col_sum[j] / total;
      const double diff = table[i][j] - e;
      out.chi2 += diff * diff / e;
    }
  }
  out.dof = static_cast<int>((r - 1) * (c - 1));
  out.p_value = ChiSquareSurvival(out.chi2, out.dof);
  return out;
}

const FeatureDrift& DriftReport::Feature(std::string_view name) const {
  for (const FeatureDrift& f : features) {
    if (f.feature == name) return f;
  }
  throw InputError("drift report has no feature '" + std::string(name) + "'");
}

DriftReport MakeDriftReport(std::span<const LoanRecord> baseline,
                            std::span<const LoanRecord> target,
                            const Schema& schema,
                            const DriftThresholds& thresholds, int baseline_year,
                            int target_year, std::vector<std::size_t> features) {
  if (baseline.empty() || target.empty()) {
    throw InputError("drift_report: empty slice");
  }
  if (features.empty()) {
    for (std::size_t f = 0; f < schema.size(); ++f) features.push_back(f);
  }
  DriftReport report;
  report.baseline_year = baseline_year;
  report.target_year = target_year;

  std::vector<double> xs(baseline.size());
  std::vector<double> ys(target.size());
  for (std::size_t f : features) {
    if (f >= schema.size()) throw ShapeError("drift_report: feature index outside schema");
    const FeatureSpec& spec = schema.feature(f);
    for (std::size_t i = 0; i < baseline.size(); ++i) xs[i] = baseline[i][f];
    for (std::size_t i = 0; i < target.size(); ++i) ys[i] = target[i][f];

    FeatureDrift d;
    d.feature = spec.name;
    d.kind = spec.kind;
    if (!spec.is_categorical()) {
      const BinSpec bins =
          QuantileBins(xs, std::min(thresholds.bins, xs.size()), thresholds.epsilon);
      d.psi = Psi(bins.Histogram(xs), bins.Histogram(ys), thresholds.epsilon);
      const KsResult ks = KsTwoSample(xs, ys);
      d.ks_stat = ks.statistic;
      d.ks_p = ks.p_value;
      d.drift = d.psi > thresholds.psi;
    } else {
      const std::size_t levels = spec.levels.size();
      std::vector<double> pc(levels, 0.0);
      std::vector<double> qc(levels, 0.0);
      for (double v : xs) {
        const auto l = static_cast<std::size_t>(v);
        if (l >= levels) throw EncodingError("feature '" + spec.name + "' has no level index " + std::to_string(l));
        pc[l] += 1.0;
      }
      for (double v : ys) {
        const auto l = static_cast<std::size_t>(v);
        if (l >= levels) throw EncodingError("feature '" + spec.name + "' has no level index " + std::to_string(l));
        qc[l] += 1.0;
      }
      std::vector<double> p(levels);
      std::vector<double> q(levels);
      std::vector<std::vector<double>> table(2);
      for (std::size_t l = 0; l < levels; ++l) {
        p[l] = pc[l] / static_cast<double>(xs.size());
        q[l] = qc[l] / static_cast<double>(ys.size());
        if (pc[l] + qc[l] > 0.0) {  // categories absent from both years drop out
          table[0].push_back(pc[l]);
          table[1].push_back(qc[l]);
        }
      }
      d.js = JsDivergence(p, q);
      if (table[0].size() >= 2) {
        const ChiSquareResult chi = ChiSquareIndependence(table);
        d.chi2 = chi.chi2;
        d.chi2_p = chi.p_value;
        d.chi2_dof = chi.dof;
      }
      d.drift = d.chi2_p < thresholds.chi2_alpha;
    }
    report.features.push_back(std::move(d));
  }

  auto rate = [](std::span<const LoanRecord> rs) {
    double s = 0.0;
    for (const LoanRecord& r : rs) s += r.label;
    return s / static_cast<double>(rs.size());
  };
  report.label_rate_delta = rate(target) - rate(baseline);
  return report;
}

}  // namespace driftscope
