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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftscope/drift.hpp"
#include "driftscope/encoding.hpp"
#include "driftscope/panel.hpp"
#include "driftscope/shapley.hpp"

namespace driftscope {

// Static reference: `size` records drawn (seeded) from every year before
// test_year. Draws are nested: a smaller size is a prefix of a larger one.
BackgroundSet StaticBackground(const Panel& panel, int test_year,
                               std::size_t size, std::uint64_t seed);

// Sliding window: the `window` most recent records before test_year, latest
// year first; the oldest year that only partly fits is subsampled (seeded,
// nested in `window`). Throws InputError when no prior records exist.
BackgroundSet SlidingWindowBackground(const Panel& panel, int test_year,
                                      std::size_t window, std::uint64_t seed);

// Per-feature drift score (PSI for numeric, JS for categorical features)
// and the derived weight 1 / (1 + score).
struct DriftWeights {
  std::vector<std::string> features;
  std::vector<double> scores;
  std::vector<double> weights;

  static DriftWeights FromScores(std::vector<std::string> features,
                                 std::vector<double> scores);
};

// Scores the model's features between the training window and the test
// year using the given drift settings.
DriftWeights ComputeDriftWeights(std::span<const LoanRecord> train,
                                 std::span<const LoanRecord> test,
                                 const Schema& schema, const ColumnMap& columns,
                                 const DriftThresholds& thresholds);

// Ranking-only reweighting: entry_j * weight_j. Tagged "A".
ImportanceVector MethodAAdjust(const ImportanceVector& importance,
                               const DriftWeights& weights);

struct SurrogateParams {
  double forgetting = 0.9;
  double penalty = 1.0;
  double trigger_cosine = 0.98;
  double blend = 0.5;

  void Validate() const;
};

// One ridge system per explained feature mapping the standardized encoded
// row (plus intercept) to that feature's attribution. Every system shares
// the same design, so a single Gram matrix is kept and solved once per
// update with one right-hand side per feature.
class RidgeSurrogate {
 public:
  RidgeSurrogate() = default;
  explicit RidgeSurrogate(SurrogateParams params);

  const SurrogateParams& params() const { return params_; }
  bool fitted() const { return updates_ > 0; }
  int updates() const { return updates_; }
  std::size_t dim() const { return mean_.size() + 1; }
  const std::vector<std::string>& features() const { return features_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& scale() const { return scale_; }
  // d x d, row-major.
  const std::vector<double>& gram() const { return gram_; }
  const std::vector<double>& rhs(std::size_t j) const { return rhs_.at(j); }
  const std::vector<double>& weights(std::size_t j) const { return weights_.at(j); }

  // Freezes per-column mean and population sd (sd 0 maps to 1). Called by
  // the first Update when not yet frozen.
  void FreezeStandardization(const EncodedMatrix& rows);
  bool frozen() const { return !mean_.empty(); }

  // A <- forgetting * A + Z'Z, b_j <- forgetting * b_j + Z' phi_j, then
  // re-solves (A + penalty I) w_j = b_j.
  void Update(const AttributionMatrix& attrs, const EncodedMatrix& rows);

  // Surrogate attributions for one encoded row, one per feature.
  std::vector<double> Predict(std::span<const double> row) const;

  nlohmann::ordered_json ToJson() const;
  static RidgeSurrogate FromJson(const nlohmann::json& doc,
                                 const std::string& origin);

 private:
  void Solve();
  std::vector<double> Standardized(std::span<const double> row) const;

  SurrogateParams params_;
  std::vector<std::string> features_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> gram_;
  std::vector<std::vector<double>> rhs_;
  std::vector<std::vector<double>> weights_;
  int updates_ = 0;
};

struct Recalibration {
  AttributionMatrix attrs;  // tagged "C"
  double cosine = 1.0;      // raw vs surrogate importance
  bool triggered = false;
};

// Blends raw attributions toward the surrogate when the importance cosine
// drops below the trigger. Throws StateError for an unfitted surrogate.
Recalibration MethodCRecalibrate(const RidgeSurrogate& surrogate,
                                 const AttributionMatrix& raw,
                                 const EncodedMatrix& rows);

}  // namespace driftscope
