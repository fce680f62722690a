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

#include "driftscope/schema.hpp"

#include <limits>
#include <utility>

#include "driftscope/errors.hpp"

namespace driftscope {
namespace {

FeatureSpec Numeric(std::string name, double lower, double upper,
                    int decimals) {
  FeatureSpec f;
  f.name = std::move(name);
  f.kind = FeatureKind::kNumeric;
  f.lower = lower;
  f.upper = upper;
  f.decimals = decimals;
  return f;
}

FeatureSpec Categorical(std::string name, std::vector<std::string> levels,
                        bool sensitive = false) {
  FeatureSpec f;
  f.name = std::move(name);
  f.kind = FeatureKind::kCategorical;
  f.levels = std::move(levels);
  f.sensitive = sensitive;
  return f;
}

}  // namespace

const Schema& Schema::Lending() {
  static const Schema* const kSchema = new Schema({
      Numeric("annual_income", 1000.0, 5.0e6, 2),
      Numeric("credit_score", 300.0, 850.0, 0),
      Numeric("age", 18.0, 90.0, 0),
      Categorical("employment_status",
                  {"employed", "unemployed", "self_employed"}),
      Numeric("employment_length", 0.0, 60.0, 1),
      Numeric("dti", 0.0, 1.0, 4),
      Numeric("loan_amount", 500.0, 1.0e6, 2),
      Numeric("credit_utilization", 0.0, 1.0, 4),
      Numeric("num_open_accounts", 0.0, 60.0, 0),
      Numeric("delinquencies_2y", 0.0, 20.0, 0),
      Numeric("loan_term_months", 12.0, 84.0, 0),
      Categorical("region", {"northeast", "midwest", "south", "west"}),
      Categorical("race", {"race_a", "race_b", "race_c", "race_d"},
                  /*sensitive=*/true),
      Categorical("gender", {"female", "male"}, /*sensitive=*/true),
  });
  return *kSchema;
}

Schema::Schema(std::vector<FeatureSpec> features)
    : features_(std::move(features)) {}

std::size_t Schema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  throw InputError("unknown feature '" + std::string(name) + "'");
}

int Schema::LevelIndex(std::size_t feature, std::string_view level) const {
  const FeatureSpec& f = features_.at(feature);
  for (std::size_t i = 0; i < f.levels.size(); ++i) {
    if (f.levels[i] == level) return static_cast<int>(i);
  }
  throw EncodingError("feature '" + f.name + "' has no level '" +
                      std::string(level) + "'");
}

std::vector<std::size_t> Schema::ModelFeatures(bool include_sensitive) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (include_sensitive || !features_[i].sensitive) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Schema::SensitiveFeatures() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].sensitive) out.push_back(i);
  }
  return out;
}

nlohmann::ordered_json Schema::ToJson() const {
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (const FeatureSpec& f : features_) {
    nlohmann::ordered_json j;
    j["name"] = f.name;
    j["kind"] = f.is_categorical() ? "categorical" : "numeric";
    j["sensitive"] = f.sensitive;
    if (f.is_categorical()) {
      j["levels"] = f.levels;
    } else {
      j["lower"] = f.lower;
      j["upper"] = f.upper;
      j["decimals"] = f.decimals;
    }
    features.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["features"] = std::move(features);
  out["label"] = "default";
  return out;
}

bool Schema::operator==(const Schema& other) const {
  if (features_.size() != other.features_.size()) return false;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const FeatureSpec& a = features_[i];
    const FeatureSpec& b = other.features_[i];
    if (a.name != b.name || a.kind != b.kind || a.levels != b.levels ||
        a.sensitive != b.sensitive) {
      return false;
    }
  }
  return true;
}

}  // namespace driftscope
