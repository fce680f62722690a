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
#include "driftscope/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftscope/drift.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/rng.hpp"
#include "driftscope/special.hpp"

namespace driftscope {
namespace {

std::map<std::string, std::vector<std::size_t>> IndexGroups(
    const std::vector<std::string>& groups) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < groups.size(); ++i) out[groups[i]].push_back(i);
  return out;
}

template <class Rate>
double MaxGap(const std::vector<GroupOutcome>& outcomes, Rate rate) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const GroupOutcome& g : outcomes) {
    const std::optional<double> r = rate(g);
    if (!r) continue;
    lo = std::min(lo, *r);
    hi = std::max(hi, *r);
  }
  return hi > lo ? hi - lo : 0.0;
}

// Fixed-width bitset over positive counts [0, bits).
class CountSet {
 public:
  explicit CountSet(std::size_t bits) : words_((bits + 63) / 64, 0), bits_(bits) {}
  void Set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool Test(std::size_t i) const {
    return i < bits_ && ((words_[i / 64] >> (i % 64)) & 1U);
  }
  bool Empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  // this |= other << shift
  void OrShifted(const CountSet& other, std::size_t shift) {
    const std::size_t ws = shift / 64;
    const std::size_t bs = shift % 64;
    for (std::size_t k = words_.size(); k-- > ws;) {
      std::uint64_t v = other.words_[k - ws] << bs;
      if (bs != 0 && k - ws >= 1) v |= other.words_[k - ws - 1] >> (64 - bs);
      words_[k] |= v;
    }
    if (bits_ % 64 != 0) words_.back() &= (std::uint64_t{1} << (bits_ % 64)) - 1;
  }
  bool AnyIn(std::size_t lo, std::size_t hi) const {
    for (std::size_t i = lo; i <= hi && i < bits_; ++i) {
      if (Test(i)) return true;
    }
    return false;
  }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t bits_;
};

struct Choice {
  std::size_t count = 0;
  double rate = 0.0;
  double deviation = 0.0;
  std::size_t grid_index = 0;
};

constexpr double kRateSlack = 1e-12;

}  // namespace

GroupOutcomes ComputeGroupOutcomes(std::span<const double> scores,
                                   std::span<const int> labels,
                                   const std::vector<std::string>& groups,
                                   const ThresholdMap& thresholds,
                                   std::size_t min_group_size) {
  if (scores.size() != labels.size() || scores.size() != groups.size()) {
    throw InputError("group_outcomes: scores, labels and groups differ in length");
  }
  const auto index = IndexGroups(groups);
  for (const auto& [name, t] : thresholds) {
    if (!index.count(name)) throw InputError("group_outcomes: unknown group '" + name + "' in thresholds");
  }
  GroupOutcomes out;
  for (const auto& [name, rows] : index) {
    const auto it = thresholds.find(name);
    if (it == thresholds.end()) throw InputError("group_outcomes: no threshold for group '" + name + "'");
    if (rows.size() < min_group_size) {
      out.excluded.push_back(name);
      continue;
    }
    GroupOutcome g;
    g.group = name;
    g.n = rows.size();
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i : rows) {
      const bool predicted = scores[i] >= it->second;
      const bool actual = labels[i] != 0;
      g.predicted_positive += predicted;
      g.actual_positive += actual;
      tp += predicted && actual;
      fp += predicted && !actual;
    }
    g.actual_negative = g.n - g.actual_positive;
    g.positive_rate = static_cast<double>(g.predicted_positive) / static_cast<double>(g.n);
    if (g.actual_positive > 0) {
      g.tpr = static_cast<double>(tp) / static_cast<double>(g.actual_positive);
    }
    if (g.actual_negative > 0) {
      g.fpr = static_cast<double>(fp) / static_cast<double>(g.actual_negative);
    }
    out.groups.push_back(std::move(g));
  }
  return out;
}

GroupOutcomes ComputeGroupOutcomes(std::span<const double> scores,
                                   std::span<const int> labels,
                                   const std::vector<std::string>& groups,
                                   double threshold, std::size_t min_group_size) {
  ThresholdMap t;
  for (const std::string& g : groups) t.emplace(g, threshold);
  return ComputeGroupOutcomes(scores, labels, groups, t, min_group_size);
}

double Dpd(const std::vector<GroupOutcome>& outcomes) {
  return MaxGap(outcomes, [](const GroupOutcome& g) {
    return std::optional<double>(g.positive_rate);
  });
}

double Eod(const std::vector<GroupOutcome>& outcomes) {
  return MaxGap(outcomes, [](const GroupOutcome& g) { return g.tpr; });
}

double Eodds(const std::vector<GroupOutcome>& outcomes) {
  return std::max(Eod(outcomes),
                  MaxGap(outcomes, [](const GroupOutcome& g) { return g.fpr; }));
}

std::vector<double> ThresholdGrid(const RecalibrationOptions& o) {
  if (!(o.grid_step > 0.0) || !(o.grid_hi >= o.grid_lo)) {
    throw ConfigError("fairness.grid: need step > 0 and hi >= lo");
  }
  const auto steps = static_cast<std::size_t>(std::llround((o.grid_hi - o.grid_lo) / o.grid_step));
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    grid[i] = std::round((o.grid_lo + static_cast<double>(i) * o.grid_step) * 1e9) / 1e9;
  }
  return grid;
}

RecalibrationResult RecalibrateGroupThresholds(std::span<const double> scores,
                                               const std::vector<std::string>& groups,
                                               const RecalibrationOptions& options) {
  if (scores.size() != groups.size()) {
    throw InputError("recalibrate: scores and groups differ in length");
  }
  if (!(options.rate_tolerance >= 0.0)) throw ConfigError("fairness.rate_tolerance: must be >= 0");
  const std::vector<double> grid = ThresholdGrid(options);
  if (std::find(grid.begin(), grid.end(), options.base_threshold) == grid.end()) {
    throw ConfigError("fairness.base_threshold: must lie on the threshold grid");
  }

  const auto index = IndexGroups(groups);
  std::vector<std::string> names;
  std::vector<std::vector<Choice>> choices;  // per eligible group, ascending count
  std::size_t excluded_count = 0;
  std::size_t base_total = 0;
  RecalibrationResult result;
  for (const auto& [name, rows] : index) {
    std::vector<double> s;
    s.reserve(rows.size());
    for (std::size_t i : rows) s.push_back(scores[i]);
    std::sort(s.begin(), s.end());
    auto count_at = [&](double t) {
      return static_cast<std::size_t>(s.end() - std::lower_bound(s.begin(), s.end(), t));
    };
    base_total += count_at(options.base_threshold);
    result.thresholds[name] = options.base_threshold;
    if (rows.size() < options.min_group_size) {
      excluded_count += count_at(options.base_threshold);
      continue;
    }
    // One choice per distinct count: the grid point closest to the base.
    std::map<std::size_t, Choice> best;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Choice c;
      c.count = count_at(grid[i]);
      c.rate = static_cast<double>(c.count) / static_cast<double>(rows.size());
      c.deviation = std::fabs(grid[i] - options.base_threshold);
      c.grid_index = i;
      auto it = best.find(c.count);
      if (it == best.end() || c.deviation < it->second.deviation) best[c.count] = c;
    }
    std::vector<Choice> list;
    for (const auto& [count, c] : best) list.push_back(c);
    names.push_back(name);
    choices.push_back(std::move(list));
  }
  if (names.size() < 2) throw InputError("recalibrate: need at least two eligible groups");

  const std::size_t total = scores.size();
  const double slack = options.rate_tolerance * static_cast<double>(total);
  const double lo_real = static_cast<double>(base_total) - slack;
  const double hi_real = static_cast<double>(base_total) + slack;
  const auto window_lo_all = static_cast<long long>(std::ceil(lo_real - 1e-9));
  const auto window_hi_all = static_cast<long long>(std::floor(hi_real + 1e-9));
  const long long window_lo = std::max(0LL, window_lo_all - static_cast<long long>(excluded_count));
  const long long window_hi = window_hi_all - static_cast<long long>(excluded_count);

  std::vector<double> rates;
  for (const auto& list : choices) {
    for (const Choice& c : list) rates.push_back(c.rate);
  }
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());

  const std::size_t bits = total + 1;
  auto admissible = [&](const Choice& c, double band_lo, double gap, double dev) {
    return c.rate >= band_lo - kRateSlack && c.rate <= band_lo + gap + kRateSlack &&
           c.deviation <= dev + 1e-12;
  };
  // Suffix reachability for one band; suffix[g] = totals reachable by
  // groups g..G-1.
  auto suffix_sets = [&](double band_lo, double gap, double dev) {
    std::vector<CountSet> suffix(names.size() + 1, CountSet(bits));
    suffix[names.size()].Set(0);
    for (std::size_t g = names.size(); g-- > 0;) {
      for (const Choice& c : choices[g]) {
        if (admissible(c, band_lo, gap, dev)) suffix[g].OrShifted(suffix[g + 1], c.count);
      }
      if (suffix[g].Empty()) break;
    }
    return suffix;
  };
  auto band_feasible = [&](double band_lo, double gap, double dev) {
    if (window_hi < window_lo || window_hi < 0) return false;
    CountSet reach(bits);
    reach.Set(0);
    for (std::size_t g = 0; g < names.size(); ++g) {
      CountSet next(bits);
      for (const Choice& c : choices[g]) {
        if (admissible(c, band_lo, gap, dev)) next.OrShifted(reach, c.count);
      }
      if (next.Empty()) return false;
      reach = std::move(next);
    }
    return reach.AnyIn(static_cast<std::size_t>(window_lo), static_cast<std::size_t>(window_hi));
  };
  auto feasible = [&](double gap, double dev) {
    for (double band_lo : rates) {
      if (band_feasible(band_lo, gap, dev)) return true;
    }
    return false;
  };

  // Uniform assignment at the base threshold.
  {
    std::vector<double> base_rates;
    for (std::size_t g = 0; g < names.size(); ++g) {
      const auto& rows = index.at(names[g]);
      std::size_t c = 0;
      for (std::size_t i : rows) c += scores[i] >= options.base_threshold;
      base_rates.push_back(static_cast<double>(c) / static_cast<double>(rows.size()));
    }
    result.dpd_before = *std::max_element(base_rates.begin(), base_rates.end()) -
                        *std::min_element(base_rates.begin(), base_rates.end());
  }

  std::vector<double> gaps;
  for (std::size_t a = 0; a < rates.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double d = rates[a] - rates[b];
      if (d <= result.dpd_before + kRateSlack) gaps.push_back(d);
    }
  }
  gaps.push_back(result.dpd_before);
  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
  const double max_dev = std::max(options.base_threshold - grid.front(),
                                  grid.back() - options.base_threshold);

  std::size_t lo = 0;
  std::size_t hi = gaps.size() - 1;  // dpd_before is always feasible
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(gaps[mid], max_dev + 1.0)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const double best_gap = gaps[lo];

  std::vector<double> devs;
  for (double t : grid) devs.push_back(std::fabs(t - options.base_threshold));
  std::sort(devs.begin(), devs.end());
  devs.erase(std::unique(devs.begin(), devs.end()), devs.end());
  lo = 0;
  hi = devs.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(best_gap, devs[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const double best_dev = devs[lo];

  // Reconstruct: lowest feasible band, then per group (name order) the
  // choice closest to the base threshold, lowest grid index on ties.
  for (double band_lo : rates) {
    if (!band_feasible(band_lo, best_gap, best_dev)) continue;
    const std::vector<CountSet> suffix = suffix_sets(band_lo, best_gap, best_dev);
    long long used = 0;
    for (std::size_t g = 0; g < names.size(); ++g) {
      const Choice* pick = nullptr;
      for (const Choice& c : choices[g]) {
        if (!admissible(c, band_lo, best_gap, best_dev)) continue;
        const long long so_far = used + static_cast<long long>(c.count);
        const long long need_lo = std::max(0LL, window_lo - so_far);
        const long long need_hi = window_hi - so_far;
        if (need_hi < 0) continue;
        if (!suffix[g + 1].AnyIn(static_cast<std::size_t>(need_lo),
                                 static_cast<std::size_t>(need_hi))) {
          continue;
        }
        if (pick == nullptr || c.deviation < pick->deviation ||
            (c.deviation == pick->deviation && c.grid_index < pick->grid_index)) {
          pick = &c;
        }
      }
      if (pick == nullptr) throw StageError("recalibrate: reconstruction failed");
      used += static_cast<long long>(pick->count);
      result.thresholds[names[g]] = grid[pick->grid_index];
    }
    break;
  }

  std::size_t after_total = 0;
  std::vector<double> after_rates;
  for (const auto& [name, rows] : index) {
    std::size_t c = 0;
    for (std::size_t i : rows) c += scores[i] >= result.thresholds.at(name);
    after_total += c;
    if (rows.size() >= options.min_group_size) {
      after_rates.push_back(static_cast<double>(c) / static_cast<double>(rows.size()));
    }
  }
  result.dpd_after = *std::max_element(after_rates.begin(), after_rates.end()) -
                     *std::min_element(after_rates.begin(), after_rates.end());
  result.overall_rate_before = static_cast<double>(base_total) / static_cast<double>(total);
  result.overall_rate_after = static_cast<double>(after_total) / static_cast<double>(total);
  if (result.dpd_after > result.dpd_before + kRateSlack) {
    throw StageError("recalibrate: result exceeds the uniform-threshold DPD");
  }
  return result;
}

std::size_t HarmfulReport::flag_count() const {
  return static_cast<std::size_t>(
      std::count_if(tests.begin(), tests.end(), [](const HarmfulFlag& f) { return f.flagged; }));
}

HarmfulReport HarmfulFeatures(const AttributionMatrix& attrs,
                              const std::vector<std::string>& groups,
                              const HarmfulOptions& options) {
  if (groups.size() != attrs.rows()) {
    throw InputError("harmful_features: group labels do not align with attributions");
  }
  if (options.resamples < 1) throw ConfigError("fairness.resamples: must be >= 1");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw ConfigError("fairness.level: must lie in (0, 1)");
  }
  const auto index = IndexGroups(groups);
  const std::size_t m = attrs.cols();
  HarmfulReport report;

  std::vector<std::string> eligible;
  for (const auto& [name, rows] : index) {
    if (rows.size() < options.min_group_size || attrs.rows() - rows.size() == 0) {
      report.excluded.push_back(name);
    } else {
      eligible.push_back(name);
    }
  }

  auto mean_diff = [&](const std::vector<std::size_t>& in,
                       const std::vector<std::size_t>& out, std::size_t j) {
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i : in) a += attrs.at(i, j);
    for (std::size_t i : out) b += attrs.at(i, j);
    return a / static_cast<double>(in.size()) - b / static_cast<double>(out.size());
  };

  const auto resamples = static_cast<std::size_t>(options.resamples);
  std::vector<std::vector<HarmfulFlag>> per_group(eligible.size());
  for (std::size_t g = 0; g < eligible.size(); ++g) {
    const std::vector<std::size_t>& in = index.at(eligible[g]);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < attrs.rows(); ++i) {
      if (groups[i] != eligible[g]) out.push_back(i);
    }
    // boot[b * m + j]
    std::vector<double> boot(resamples * m);
    ParallelFor(resamples, [&](std::size_t b) {
      CounterRng rng({options.seed, static_cast<std::uint64_t>(g), b});
      std::vector<std::size_t> rin(in.size());
      std::vector<std::size_t> rout(out.size());
      for (auto& i : rin) i = in[rng.Below(in.size())];
      for (auto& i : rout) i = out[rng.Below(out.size())];
      for (std::size_t j = 0; j < m; ++j) boot[b * m + j] = mean_diff(rin, rout, j);
    });
    for (std::size_t j = 0; j < m; ++j) {
      HarmfulFlag f;
      f.feature = attrs.features[j];
      f.group = eligible[g];
      f.difference = mean_diff(in, out, j);
      std::vector<double> draws(resamples);
      for (std::size_t b = 0; b < resamples; ++b) draws[b] = boot[b * m + j];
      std::sort(draws.begin(), draws.end());
      f.ci_lo = SortedQuantile(draws, (1.0 - options.level) / 2.0);
      f.ci_hi = SortedQuantile(draws, (1.0 + options.level) / 2.0);
      f.flagged = f.difference >= options.delta && f.ci_lo > 0.0;
      per_group[g].push_back(f);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t g = 0; g < eligible.size(); ++g) report.tests.push_back(per_group[g][j]);
  }
  return report;
}

AnovaResult OneWayAnova(std::span<const double> values, std::span<const int> groups) {
  if (values.size() != groups.size()) throw ShapeError("anova: values and groups differ in length");
  std::map<int, std::pair<double, std::size_t>> sums;
  double grand = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& s = sums[groups[i]];
    s.first += values[i];
    s.second += 1;
    grand += values[i];
  }
  const std::size_t k = sums.size();
  const std::size_t n = values.size();
  if (k < 2) throw InputError("anova: need at least two groups");
  grand /= static_cast<double>(n);
  std::map<int, double> means;
  for (const auto& [g, s] : sums) means[g] = s.first / static_cast<double>(s.second);
  double ss_between = 0.0;
  for (const auto& [g, s] : sums) {
    const double d = means[g] - grand;
    ss_between += static_cast<double>(s.second) * d * d;
  }
  double ss_within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - means[groups[i]];
    ss_within += d * d;
  }
  AnovaResult r;
  const double ss_total = ss_between + ss_within;
  if (!(ss_total > 0.0)) return r;
  r.eta_squared = ss_between / ss_total;
  if (n <= k) {
    r.f = std::numeric_limits<double>::quiet_NaN();
    r.p_value = 1.0;
    return r;
  }
  const double df1 = static_cast<double>(k - 1);
  const double df2 = static_cast<double>(n - k);
  if (ss_within == 0.0) {
    r.f = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  r.f = (ss_between / df1) / (ss_within / df2);
  r.p_value = FisherFSurvival(r.f, df1, df2);
  return r;
}

std::vector<std::string> GroupLabels(std::span<const LoanRecord> records,
                                     std::size_t feature, const Schema& schema) {
  const FeatureSpec& spec = schema.feature(feature);
  if (!spec.is_categorical()) throw InputError("group labels: '" + spec.name + "' is not categorical");
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const LoanRecord& r : records) {
    out.push_back(spec.levels.at(static_cast<std::size_t>(r.level(feature))));
  }
  return out;
}

std::vector<ProxyEntry> ProxyScan(std::span<const LoanRecord> records,
                                  std::size_t attribute, const Schema& schema,
                                  const ProxyOptions& options) {
  const FeatureSpec& attr = schema.feature(attribute);
  if (!attr.is_categorical()) throw InputError("proxy_scan: attribute '" + attr.name + "' is not categorical");
  std::vector<int> group(records.size());
  std::vector<int> present(attr.levels.size(), 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    group[i] = records[i].level(attribute);
    present.at(static_cast<std::size_t>(group[i])) = 1;
  }
  if (std::count(present.begin(), present.end(), 1) < 2) {
    throw InputError("proxy_scan: attribute '" + attr.name + "' has fewer than two levels present");
  }
  std::vector<ProxyEntry> out;
  std::vector<double> values(records.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const FeatureSpec& spec = schema.feature(f);
    if (spec.sensitive) continue;
    ProxyEntry e;
    e.feature = spec.name;
    e.attribute = attr.name;
    if (!spec.is_categorical()) {
      for (std::size_t i = 0; i < records.size(); ++i) values[i] = records[i][f];
      const AnovaResult a = OneWayAnova(values, group);
      e.stat = "anova-F";
      e.statistic = a.f;
      e.p_value = a.p_value;
      e.effect = a.eta_squared;
    } else {
      e.stat = "chi2";
      std::vector<std::vector<double>> full(attr.levels.size(),
                                            std::vector<double>(spec.levels.size(), 0.0));
      for (std::size_t i = 0; i < records.size(); ++i) {
        full[static_cast<std::size_t>(group[i])][static_cast<std::size_t>(records[i].level(f))] += 1.0;
      }
      std::vector<std::size_t> cols;
      for (std::size_t c = 0; c < spec.levels.size(); ++c) {
        double s = 0.0;
        for (const auto& row : full) s += row[c];
        if (s > 0.0) cols.push_back(c);
      }
      std::vector<std::vector<double>> table;
      for (const auto& row : full) {
        double s = 0.0;
        for (double v : row) s += v;
        if (s == 0.0) continue;
        std::vector<double> r;
        for (std::size_t c : cols) r.push_back(row[c]);
        table.push_back(std::move(r));
      }
      if (cols.size() >= 2) {
        const ChiSquareResult chi = ChiSquareIndependence(table);
        e.statistic = chi.chi2;
        e.p_value = chi.p_value;
        const double dim = static_cast<double>(std::min(table.size(), cols.size()) - 1);
        e.effect = std::sqrt(chi.chi2 / (static_cast<double>(records.size()) * dim));
      }
    }
    e.flagged = e.p_value < options.alpha && e.effect >= options.min_effect;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace driftscope
