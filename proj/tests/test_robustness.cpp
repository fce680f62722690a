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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "driftscope/adaptive.hpp"
#include "driftscope/encoding.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/gbdt.hpp"
#include "driftscope/robustness.hpp"
#include "test_support.hpp"

namespace driftscope {
namespace {

std::size_t ColumnOf(const ColumnMap& map, std::size_t feature, int level = -1) {
  for (std::size_t c = 0; c < map.size(); ++c) {
    if (map.columns()[c].feature == feature && map.columns()[c].level == level) return c;
  }
  throw std::logic_error("column not found");
}

// Risk falls as credit_score rises (three cut points) and rises when
// unemployed.
GbdtModel MonotoneModel() {
  const ColumnMap map = ModelColumnMap(Schema::Lending());
  const int score = static_cast<int>(ColumnOf(map, kCreditScore));
  const int unemployed = static_cast<int>(ColumnOf(map, kEmploymentStatus, kUnemployed));
  Tree t;
  t.nodes = {TreeNode{score, 650, 1, 2, 0},  TreeNode{score, 600, 3, 4, 0},
             TreeNode{score, 720, 5, 6, 0},  TreeNode{-1, 0, -1, -1, 1.5},
             TreeNode{-1, 0, -1, -1, 1.0},   TreeNode{-1, 0, -1, -1, 0.4},
             TreeNode{-1, 0, -1, -1, -0.3}};
  Tree u;
  u.nodes = {TreeNode{unemployed, 0.5, 1, 2, 0}, TreeNode{-1, 0, -1, -1, 0.0},
             TreeNode{-1, 0, -1, -1, 1.2}};
  return GbdtModel(-1.5, 1.0, {t, u}, map);
}

// f(x) = sum_k w_k x_k over the lending model columns.
class LinearPredictor : public Predictor {
 public:
  explicit LinearPredictor(std::vector<double> w)
      : w_(std::move(w)), columns_(ModelColumnMap(Schema::Lending())) {}
  double PredictProba(std::span<const double> row) const override {
    return std::inner_product(w_.begin(), w_.end(), row.begin(), 0.0);
  }
  using Predictor::PredictProba;
  const ColumnMap& columns() const override { return columns_; }
  std::string kind() const override { return "linear"; }

 private:
  std::vector<double> w_;
  ColumnMap columns_;
};

PerturbationSpec Multiplicative(std::string feature, double magnitude) {
  PerturbationSpec s;
  s.feature = std::move(feature);
  s.magnitude = magnitude;
  return s;
}

TEST(Perturbation, Validation) {
  const Schema& schema = Schema::Lending();
  EXPECT_THROW(Multiplicative("credit_score", 0.0).Validate(schema), InputError);
  EXPECT_THROW(Multiplicative("credit_score", 1.0).Validate(schema), InputError);
  EXPECT_THROW(Multiplicative("region", 0.1).Validate(schema), InputError);
  EXPECT_THROW(Multiplicative("nonexistent", 0.1).Validate(schema), InputError);
  PerturbationSpec flip;
  flip.feature = "employment_status";
  flip.kind = PerturbationKind::kLevelFlip;
  flip.level = "retired";
  EXPECT_THROW(flip.Validate(schema), InputError);
  flip.level = "unemployed";
  EXPECT_NO_THROW(flip.Validate(schema));
  EXPECT_EQ(flip.direction(), "->unemployed");
  EXPECT_EQ(Multiplicative("credit_score", -0.10).direction(), "-10%");
  EXPECT_EQ(Multiplicative("credit_score", 0.10).direction(), "+10%");
}

TEST(Counterfactual, MonotoneModelIsSignConsistent) {
  const Panel& panel = testing::DefaultPanel();
  const auto& records = panel.Slice(2024).records;
  const std::vector<LoanRecord> sample(records.begin(), records.begin() + 300);
  const GbdtModel model = MonotoneModel();
  const CounterfactualResult down =
      CounterfactualSweep(model, sample, panel.schema(), Multiplicative("credit_score", -0.10));
  EXPECT_GT(down.mean_delta, 0.0);
  for (double d : down.deltas) EXPECT_GE(d, 0.0);
  const CounterfactualResult up =
      CounterfactualSweep(model, sample, panel.schema(), Multiplicative("credit_score", 0.10));
  EXPECT_LT(up.mean_delta, 0.0);
  for (double d : up.deltas) EXPECT_LE(d, 0.0);
  EXPECT_LE(down.p5, down.mean_delta);
  EXPECT_GE(down.p95, down.mean_delta);

  PerturbationSpec flip;
  flip.feature = "employment_status";
  flip.kind = PerturbationKind::kLevelFlip;
  flip.level = "unemployed";
  const CounterfactualResult job = CounterfactualSweep(model, sample, panel.schema(), flip);
  std::size_t already = 0;
  for (const LoanRecord& r : sample) already += r.level(kEmploymentStatus) == kUnemployed;
  EXPECT_EQ(job.skipped, already);
  EXPECT_EQ(job.deltas.size(), sample.size() - already);
  for (double d : job.deltas) EXPECT_GT(d, 0.0);
}

TEST(Counterfactual, HandComputedMean) {
  const GbdtModel model = MonotoneModel();
  const ColumnMap& map = model.columns();
  LoanRecord r;
  r[kCreditScore] = 700;  // -> 630 under -10%
  std::vector<double> row(map.size(), 0.0);
  EncodeRow(r, map, Schema::Lending(), row);
  const double before = model.PredictProba(row);
  LoanRecord p = r;
  p[kCreditScore] = 630;
  EncodeRow(p, map, Schema::Lending(), row);
  const double after = model.PredictProba(row);
  const std::vector<LoanRecord> one = {r};
  const CounterfactualResult res =
      CounterfactualSweep(model, one, Schema::Lending(), Multiplicative("credit_score", -0.10));
  EXPECT_NEAR(res.mean_delta, after - before, 1e-15);
  EXPECT_NEAR(after - before,
              1.0 / (1.0 + std::exp(-(-1.5 + 1.0))) - 1.0 / (1.0 + std::exp(-(-1.5 + 0.4))),
              1e-15);
}

TEST(Counterfactual, ClipsToSchemaBounds) {
  const GbdtModel model = MonotoneModel();
  LoanRecord r;
  r[kCreditScore] = 840;  // +10% would exceed 850
  const std::vector<LoanRecord> one = {r};
  const CounterfactualResult res =
      CounterfactualSweep(model, one, Schema::Lending(), Multiplicative("credit_score", 0.10));
  EXPECT_EQ(res.deltas.size(), 1u);
  EXPECT_EQ(res.mean_delta, 0.0);  // 840 and 850 share a leaf
}

TEST(BackgroundSensitivity, LinearModelIsStable) {
  const Panel& panel = testing::DefaultPanel();
  const ColumnMap map = ModelColumnMap(panel.schema());
  std::vector<double> w(map.size(), 0.0);
  w[ColumnOf(map, kCreditScore)] = -0.002;
  w[ColumnOf(map, kDti)] = 0.5;
  w[ColumnOf(map, kAge)] = -0.003;
  const LinearPredictor model(w);
  const auto& test = panel.Slice(2022).records;
  const std::vector<LoanRecord> inst(test.begin(), test.begin() + 200);
  const SensitivityCurve curve = BackgroundSizeSensitivity(
      model, inst, panel.schema(), "baseline", {16, 32, 64, 128, 256},
      [&](std::size_t size) { return StaticBackground(panel, 2022, size, 4); });
  ASSERT_EQ(curve.cosines.size(), 5u);
  EXPECT_NEAR(curve.cosines.back(), 1.0, 1e-12);
  for (std::size_t i = 1; i < curve.sizes.size(); ++i) {
    EXPECT_GE(curve.cosines[i], 0.999) << curve.sizes[i];
  }
  for (double c : curve.cosines) {
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0 + 1e-12);
  }
}

TEST(BackgroundSensitivity, AreaAndErrors) {
  SensitivityCurve curve;
  curve.sizes = {16, 32, 64};
  curve.cosines = {0.9, 0.95, 1.0};
  // Trapezoids over log2 size: (0.1 + 0.05) / 2 + (0.05 + 0) / 2.
  EXPECT_NEAR(curve.area(), 0.1, 1e-15);

  const Panel& panel = testing::DefaultPanel();
  const GbdtModel model = MonotoneModel();
  const auto& test = panel.Slice(2016).records;
  const std::vector<LoanRecord> inst(test.begin(), test.begin() + 10);
  auto draw = [&](std::size_t size) { return StaticBackground(panel, 2016, size, 4); };
  EXPECT_THROW(BackgroundSizeSensitivity(model, inst, panel.schema(), "baseline",
                                         {32, 16}, draw),
               InputError);
  EXPECT_THROW(BackgroundSizeSensitivity(model, inst, panel.schema(), "baseline",
                                         {16, 4000}, draw),
               InputError);
  const SensitivityCurve a =
      BackgroundSizeSensitivity(model, inst, panel.schema(), "baseline", {16, 64}, draw);
  const SensitivityCurve b =
      BackgroundSizeSensitivity(model, inst, panel.schema(), "baseline", {16, 64}, draw);
  EXPECT_EQ(a.cosines, b.cosines);
}

}  // namespace
}  // namespace driftscope
