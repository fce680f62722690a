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
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace driftscope {

enum class FeatureKind { kNumeric, kCategorical };

// Column order of a LoanRecord. The enumerator value is the schema index.
enum Feature : std::size_t {
  kAnnualIncome = 0,
  kCreditScore,
  kAge,
  kEmploymentStatus,
  kEmploymentLength,
  kDti,
  kLoanAmount,
  kCreditUtilization,
  kNumOpenAccounts,
  kDelinquencies2y,
  kLoanTermMonths,
  kRegion,
  kRace,
  kGender,
};
inline constexpr std::size_t kFeatureCount = 14;

// Level indices of the employment_status enumeration.
enum EmploymentLevel : int { kEmployed = 0, kUnemployed = 1, kSelfEmployed = 2 };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  // Closed enumeration for categoricals; the first level is the reference.
  std::vector<std::string> levels;
  bool sensitive = false;
  // Clip range for numerics (also used to re-clip perturbed values).
  double lower = 0.0;
  double upper = 0.0;
  // Decimal places kept by the generator and written to panel.csv.
  int decimals = 0;

  bool is_categorical() const { return kind == FeatureKind::kCategorical; }
  bool has_level(std::string_view level) const {
    return std::find(levels.begin(), levels.end(), level) != levels.end();
  }
};

class Schema {
 public:
  // The lending-panel schema: 12 model features plus race and gender.
  static const Schema& Lending();

  explicit Schema(std::vector<FeatureSpec> features);

  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
  std::size_t size() const { return features_.size(); }

  // Throws InputError for an unknown name.
  std::size_t IndexOf(std::string_view name) const;
  // Level index of a categorical value; throws EncodingError naming the
  // feature and the level when it is not part of the enumeration.
  int LevelIndex(std::size_t feature, std::string_view level) const;

  // Features used as model inputs, in schema order.
  std::vector<std::size_t> ModelFeatures(bool include_sensitive = false) const;
  std::vector<std::size_t> SensitiveFeatures() const;

  nlohmann::ordered_json ToJson() const;

  bool operator==(const Schema& other) const;

 private:
  std::vector<FeatureSpec> features_;
};

// One applicant. Categorical values are stored as level indices.
struct LoanRecord {
  int year = 0;
  // Position inside the year slice; (year, row) identifies the record.
  int row = 0;
  std::array<double, kFeatureCount> values{};
  int label = 0;  // 1 = default

  double operator[](std::size_t f) const { return values[f]; }
  double& operator[](std::size_t f) { return values[f]; }
  int level(std::size_t f) const { return static_cast<int>(values[f]); }
};

}  // namespace driftscope
