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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftscope/panel.hpp"
#include "driftscope/schema.hpp"
#include "driftscope/shapley.hpp"

namespace driftscope {

inline constexpr std::size_t kDefaultMinGroupSize = 30;

// Positive prediction = predicted default (score >= threshold).
struct GroupOutcome {
  std::string group;
  std::size_t n = 0;
  std::size_t predicted_positive = 0;
  std::size_t actual_positive = 0;
  std::size_t actual_negative = 0;
  double positive_rate = 0.0;
  std::optional<double> tpr;  // empty when the group has no actual positives
  std::optional<double> fpr;  // empty when the group has no actual negatives
};

struct GroupOutcomes {
  std::vector<GroupOutcome> groups;   // eligible groups, ascending name
  std::vector<std::string> excluded;  // groups below the minimum size
};

using ThresholdMap = std::map<std::string, double>;

// Throws InputError on length mismatch, a group without a threshold, or a
// threshold for a group absent from the data.
GroupOutcomes ComputeGroupOutcomes(std::span<const double> scores,
                                   std::span<const int> labels,
                                   const std::vector<std::string>& groups,
                                   const ThresholdMap& thresholds,
                                   std::size_t min_group_size = kDefaultMinGroupSize);
GroupOutcomes ComputeGroupOutcomes(std::span<const double> scores,
                                   std::span<const int> labels,
                                   const std::vector<std::string>& groups,
                                   double threshold,
                                   std::size_t min_group_size = kDefaultMinGroupSize);

// Max pairwise gaps; pairs with an undefined rate are skipped.
double Dpd(const std::vector<GroupOutcome>& outcomes);
double Eod(const std::vector<GroupOutcome>& outcomes);
double Eodds(const std::vector<GroupOutcome>& outcomes);

struct RecalibrationOptions {
  double base_threshold = 0.5;
  double grid_step = 0.005;
  double grid_lo = 0.05;
  double grid_hi = 0.95;
  double rate_tolerance = 0.01;
  std::size_t min_group_size = kDefaultMinGroupSize;
};

struct RecalibrationResult {
  ThresholdMap thresholds;  // every group, excluded ones at the base
  double dpd_before = 0.0;
  double dpd_after = 0.0;
  double overall_rate_before = 0.0;
  double overall_rate_after = 0.0;
};

// Grid thresholds on lo + i * step. Minimizes DPD over eligible groups with
// the overall positive rate kept within the tolerance of the base rate;
// ties go to the smallest maximum distance from the base threshold, then to
// the lowest band and the lowest thresholds. Exact: the minimum is found by
// sweeping candidate rate bands with a subset-sum over reachable positive
// counts. Throws InputError for fewer than two eligible groups.
RecalibrationResult RecalibrateGroupThresholds(std::span<const double> scores,
                                               const std::vector<std::string>& groups,
                                               const RecalibrationOptions& options = {});

// Grid value i, computed from integer steps so 0.5 is hit exactly.
std::vector<double> ThresholdGrid(const RecalibrationOptions& options);

struct HarmfulOptions {
  double delta = 0.005;
  int resamples = 500;
  double level = 0.95;
  std::uint64_t seed = 23;
  std::size_t min_group_size = kDefaultMinGroupSize;
};

struct HarmfulFlag {
  std::string feature;
  std::string group;
  double difference = 0.0;  // mean phi in group - mean phi outside
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool flagged = false;
};

struct HarmfulReport {
  std::vector<HarmfulFlag> tests;  // every (feature, group), feature-major
  std::vector<std::string> excluded;
  std::size_t flag_count() const;
};

// Flags (feature, group) when the in-group minus out-group mean attribution
// is >= delta and its stratified percentile bootstrap CI excludes 0.
HarmfulReport HarmfulFeatures(const AttributionMatrix& attrs,
                              const std::vector<std::string>& groups,
                              const HarmfulOptions& options = {});

struct ProxyEntry {
  std::string feature;
  std::string attribute;
  std::string stat;  // "anova-F" or "chi2"
  double statistic = 0.0;
  double p_value = 1.0;
  double effect = 0.0;  // eta^2 or Cramer's V
  bool flagged = false;
};

struct ProxyOptions {
  double alpha = 0.01;
  double min_effect = 0.01;
};

// eta^2 = SS_between / SS_total, F-test with (k-1, n-k) dof.
struct AnovaResult {
  double f = 0.0;
  double p_value = 1.0;
  double eta_squared = 0.0;
};
AnovaResult OneWayAnova(std::span<const double> values, std::span<const int> groups);

// Scans every non-sensitive feature against one sensitive attribute.
// Throws InputError when fewer than two attribute levels are present.
std::vector<ProxyEntry> ProxyScan(std::span<const LoanRecord> records,
                                  std::size_t attribute, const Schema& schema,
                                  const ProxyOptions& options = {});

// Level names of a categorical feature, one per record.
std::vector<std::string> GroupLabels(std::span<const LoanRecord> records,
                                     std::size_t feature, const Schema& schema);

}  // namespace driftscope
