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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "driftscope/adaptive.hpp"
#include "driftscope/encoding.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/gbdt.hpp"
#include "driftscope/rng.hpp"
#include "driftscope/shapley.hpp"
#include "driftscope/stability.hpp"
#include "driftscope/training.hpp"
#include "test_support.hpp"

namespace driftscope {
namespace {

ImportanceVector Vec(std::vector<double> values) {
  ImportanceVector v;
  v.year = 2020;
  for (std::size_t i = 0; i < values.size(); ++i) v.features.push_back("f" + std::to_string(i));
  v.values = std::move(values);
  return v;
}

EncodedMatrix RandomRows(std::size_t rows, std::size_t cols, std::uint64_t key) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("x" + std::to_string(c));
  EncodedMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.columns = ColumnMap::Numeric(names);
  CounterRng rng(key);
  m.data.resize(rows * cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    m.data[i] = rng.Normal(static_cast<double>(i % cols), 1.0 + static_cast<double>(i % cols));
  }
  return m;
}

// Attributions phi_j = c_j . [z, 1] with z standardized by population
// moments of `rows`, computed here independently of the surrogate.
AttributionMatrix LinearAttributions(const EncodedMatrix& rows,
                                     const std::vector<std::vector<double>>& coef) {
  const std::size_t d = rows.cols;
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    for (std::size_t c = 0; c < d; ++c) mean[c] += rows.at(i, c);
  }
  for (double& m : mean) m /= static_cast<double>(rows.rows);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    for (std::size_t c = 0; c < d; ++c) sd[c] += std::pow(rows.at(i, c) - mean[c], 2);
  }
  for (double& s : sd) s = std::sqrt(s / static_cast<double>(rows.rows));
  AttributionMatrix a;
  for (std::size_t j = 0; j < coef.size(); ++j) a.features.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < rows.rows; ++i) {
    a.instance_ids.push_back(static_cast<int>(i));
    for (const auto& c : coef) {
      double v = c[d];
      for (std::size_t k = 0; k < d; ++k) v += c[k] * (rows.at(i, k) - mean[k]) / sd[k];
      a.phi.push_back(v);
    }
  }
  return a;
}

TEST(DriftWeights, FormAndMonotonicity) {
  const DriftWeights w = DriftWeights::FromScores({"a", "b", "c"}, {0.0, 1.0, 3.0});
  EXPECT_EQ(w.weights[0], 1.0);
  EXPECT_EQ(w.weights[1], 0.5);
  EXPECT_EQ(w.weights[2], 0.25);
}

TEST(MethodA, IdentityWithoutDrift) {
  const ImportanceVector v = Vec({0.3, 0.1, 0.25, 0.0});
  const DriftWeights w = DriftWeights::FromScores(v.features, {0, 0, 0, 0});
  const ImportanceVector a = MethodAAdjust(v, w);
  EXPECT_EQ(a.values, v.values);
  EXPECT_EQ(a.method, "A");
}

TEST(MethodA, SingleFeatureHalves) {
  const ImportanceVector v = Vec({0.3, 0.1, 0.25});
  const ImportanceVector a =
      MethodAAdjust(v, DriftWeights::FromScores(v.features, {0, 1, 0}));
  EXPECT_EQ(a.values, (std::vector<double>{0.3, 0.05, 0.25}));
}

TEST(MethodA, FeatureMismatchIsShapeError) {
  const ImportanceVector v = Vec({0.3, 0.1});
  EXPECT_THROW(MethodAAdjust(v, DriftWeights::FromScores({"f0", "zz"}, {0, 0})),
               ShapeError);
}

TEST(MethodA, SignAndRankProperties) {
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    CounterRng rng({0xAA, trial});
    const std::size_t m = 3 + rng.Below(8);
    std::vector<double> values(m), scores(m);
    for (std::size_t i = 0; i < m; ++i) {
      values[i] = rng.Uniform();
      scores[i] = rng.Uniform() < 0.3 ? 0.0 : rng.Exponential(0.3);
    }
    const ImportanceVector v = Vec(values);
    const DriftWeights w = DriftWeights::FromScores(v.features, scores);
    const ImportanceVector a = MethodAAdjust(v, w);
    for (std::size_t i = 0; i < m; ++i) EXPECT_GE(a.values[i], 0.0);
    // The feature with the strictly smallest weight is never promoted.
    const auto min_it = std::min_element(w.weights.begin(), w.weights.end());
    if (std::count(w.weights.begin(), w.weights.end(), *min_it) != 1) continue;
    const std::size_t j = static_cast<std::size_t>(min_it - w.weights.begin());
    auto rank = [&](const std::vector<double>& x) {
      return std::count_if(x.begin(), x.end(), [&](double y) { return y > x[j]; });
    };
    EXPECT_GE(rank(a.values), rank(values));
  }
}

TEST(MethodA, SmallestWeightNotPromotedIn2021) {
  const Panel& panel = testing::DefaultPanel();
  const auto train = panel.RecordsBefore(2021);
  const auto& test = panel.Slice(2021).records;
  const ColumnMap map = ModelColumnMap(panel.schema());
  const DriftWeights w = ComputeDriftWeights(train, test, panel.schema(), map, {});
  const auto emp = static_cast<std::size_t>(
      std::find(w.features.begin(), w.features.end(), "employment_status") -
      w.features.begin());
  ASSERT_LT(emp, w.features.size());
  // The recession shifts the employment mix, so its weight drops below 1.
  EXPECT_LT(w.weights[emp], 1.0);
  const auto low = static_cast<std::size_t>(
      std::min_element(w.weights.begin(), w.weights.end()) - w.weights.begin());
  ImportanceVector v;
  v.features = w.features;
  v.values.assign(w.features.size(), 0.02);
  v.values[low] = 0.021;
  const ImportanceVector a = MethodAAdjust(v, w);
  auto above = [&](const std::vector<double>& x) {
    return std::count_if(x.begin(), x.end(), [&](double y) { return y > x[low]; });
  };
  EXPECT_GE(above(a.values), above(v.values));
}

TEST(MethodB, RecencyRule) {
  const Panel& panel = testing::DefaultPanel();
  const BackgroundSet bg = SlidingWindowBackground(panel, 2020, 512, 3);
  EXPECT_EQ(bg.size(), 512u);
  EXPECT_EQ(bg.provenance, BackgroundProvenance::kSlidingWindow);
  for (const LoanRecord& r : bg.records) EXPECT_EQ(r.year, 2019);
  // Window spanning two years takes the whole later year first.
  const BackgroundSet wide = SlidingWindowBackground(panel, 2020, 2500, 3);
  EXPECT_EQ(std::count_if(wide.records.begin(), wide.records.end(),
                          [](const LoanRecord& r) { return r.year == 2019; }),
            2000);
  EXPECT_EQ(std::count_if(wide.records.begin(), wide.records.end(),
                          [](const LoanRecord& r) { return r.year == 2018; }),
            500);
  EXPECT_THROW(SlidingWindowBackground(panel, 2015, 512, 3), InputError);
  // Nested draws.
  const BackgroundSet small = SlidingWindowBackground(panel, 2020, 64, 3);
  for (const LoanRecord& r : small.records) {
    EXPECT_TRUE(std::any_of(bg.records.begin(), bg.records.end(), [&](const LoanRecord& s) {
      return s.year == r.year && s.row == r.row;
    }));
  }
}

TEST(MethodB, FullHistoryEqualsBaseline) {
  GeneratorConfig config;
  config.rows_per_year = 150;
  config.years = {2015, 2016, 2017, 2018};
  const Panel panel = GeneratePanel(config);
  const auto train = panel.RecordsBefore(2018);
  GbdtParams params;
  params.n_trees = 15;
  const GbdtModel model =
      FitGbdt(Encode(train, panel.schema()), Labels(train), params);
  const BackgroundSet stat = StaticBackground(panel, 2018, 100000, 9);
  const BackgroundSet slide = SlidingWindowBackground(panel, 2018, 100000, 9);
  ASSERT_EQ(stat.size(), 450u);
  const auto& test = panel.Slice(2018).records;
  const std::vector<LoanRecord> inst(test.begin(), test.begin() + 20);
  const AttributionMatrix a = Explain(model, inst, stat, panel.schema());
  const AttributionMatrix b = Explain(model, inst, slide, panel.schema());
  EXPECT_EQ(a.phi, b.phi);
  EXPECT_EQ(a.base_value, b.base_value);
}

TEST(StaticBackground, DrawsFromTrainingYearsAndNests) {
  const Panel& panel = testing::DefaultPanel();
  const BackgroundSet bg = StaticBackground(panel, 2019, 64, 5);
  EXPECT_EQ(bg.size(), 64u);
  for (const LoanRecord& r : bg.records) EXPECT_LT(r.year, 2019);
  const BackgroundSet big = StaticBackground(panel, 2019, 256, 5);
  for (const LoanRecord& r : bg.records) {
    EXPECT_TRUE(std::any_of(big.records.begin(), big.records.end(), [&](const LoanRecord& s) {
      return s.year == r.year && s.row == r.row;
    }));
  }
}

TEST(Surrogate, RecoversLinearMap) {
  const EncodedMatrix rows = RandomRows(300, 4, 77);
  const std::vector<std::vector<double>> coef = {
      {0.5, -1.0, 0.0, 2.0, 0.3}, {0.0, 0.25, -0.75, 1.0, -0.1}};
  SurrogateParams params;
  params.forgetting = 1.0;
  params.penalty = 1e-10;
  RidgeSurrogate s(params);
  s.Update(LinearAttributions(rows, coef), rows);
  ASSERT_EQ(s.dim(), 5u);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(s.weights(j)[k], coef[j][k], 1e-6);
  }
}

TEST(Surrogate, LargePenaltyShrinksToZero) {
  const EncodedMatrix rows = RandomRows(100, 3, 78);
  SurrogateParams params;
  params.penalty = 1e9;
  RidgeSurrogate s(params);
  s.Update(LinearAttributions(rows, {{0.4, -0.2, 0.1, 0.05}}), rows);
  double norm = 0.0;
  for (double w : s.weights(0)) norm += w * w;
  EXPECT_LE(std::sqrt(norm), 1e-6);
}

TEST(Surrogate, FullForgettingKeepsLatestYearOnly) {
  const EncodedMatrix first = RandomRows(80, 3, 79);
  const EncodedMatrix second = RandomRows(80, 3, 80);
  SurrogateParams params;
  params.forgetting = 0.0;
  RidgeSurrogate chained(params);
  chained.Update(LinearAttributions(first, {{1, 2, 3, 4}}), first);
  // Standardization is frozen on the first year, so the fresh fit freezes
  // the same statistics before fitting on the second year only.
  RidgeSurrogate fresh(params);
  fresh.FreezeStandardization(first);
  const AttributionMatrix latest = LinearAttributions(second, {{-1, 0.5, 0, 2}});
  chained.Update(latest, second);
  fresh.Update(latest, second);
  EXPECT_EQ(chained.gram(), fresh.gram());
  EXPECT_EQ(chained.rhs(0), fresh.rhs(0));
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(chained.weights(0)[k], fresh.weights(0)[k], 1e-12);
  }
}

TEST(Surrogate, SolveResidualAndSymmetry) {
  const EncodedMatrix rows = RandomRows(200, 5, 81);
  RidgeSurrogate s;
  const AttributionMatrix a = LinearAttributions(rows, {{1, 0, 0, 0, 0, 0}, {0, 1, 1, 0, 0, 2}});
  s.Update(a, rows);
  s.Update(a, rows);
  const std::size_t d = s.dim();
  const auto& A = s.gram();
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) EXPECT_EQ(A[r * d + c], A[c * d + r]);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& w = s.weights(j);
    const auto& b = s.rhs(j);
    for (std::size_t r = 0; r < d; ++r) {
      double lhs = s.params().penalty * w[r];
      for (std::size_t c = 0; c < d; ++c) lhs += A[r * d + c] * w[c];
      EXPECT_LE(std::abs(lhs - b[r]), 1e-8 * std::max(1.0, std::abs(b[r])));
    }
  }
}

TEST(Surrogate, ErrorsAndSerialization) {
  const EncodedMatrix rows = RandomRows(20, 3, 82);
  AttributionMatrix a = LinearAttributions(rows, {{1, 0, 0, 0}});
  RidgeSurrogate s;
  EXPECT_THROW(MethodCRecalibrate(s, a, rows), StateError);
  AttributionMatrix short_a = a;
  short_a.instance_ids.pop_back();
  short_a.phi.pop_back();
  EXPECT_THROW(s.Update(short_a, rows), ShapeError);
  AttributionMatrix bad = a;
  bad.phi[3] = std::nan("");
  EXPECT_THROW(s.Update(bad, rows), NumericError);
  s.Update(a, rows);
  const RidgeSurrogate back = RidgeSurrogate::FromJson(s.ToJson(), "state");
  EXPECT_EQ(back.ToJson().dump(), s.ToJson().dump());
  EXPECT_EQ(back.Predict(rows.row(3)), s.Predict(rows.row(3)));
}

TEST(MethodC, UntriggeredReturnsRaw) {
  const EncodedMatrix rows = RandomRows(120, 3, 83);
  const AttributionMatrix a = LinearAttributions(rows, {{0.3, -0.2, 0.1, 0.05}, {0, 0.4, 0, 0}});
  RidgeSurrogate s;
  s.Update(a, rows);
  const Recalibration r = MethodCRecalibrate(s, a, rows);
  EXPECT_FALSE(r.triggered);
  EXPECT_GE(r.cosine, s.params().trigger_cosine);
  EXPECT_EQ(r.attrs.phi, a.phi);
  EXPECT_EQ(r.attrs.method, "C");
}

TEST(MethodC, ForcedTriggerBlends) {
  const EncodedMatrix rows = RandomRows(60, 3, 84);
  const AttributionMatrix train = LinearAttributions(rows, {{0.3, -0.2, 0.1, 0.05}});
  // Raw attributions off the surrogate's span.
  AttributionMatrix raw = train;
  CounterRng rng(85);
  for (double& v : raw.phi) v += rng.Normal(0.0, 0.3);
  for (double alpha : {1.0, 0.5}) {
    SurrogateParams params;
    params.trigger_cosine = 1.01;
    params.blend = alpha;
    RidgeSurrogate s(params);
    s.Update(train, rows);
    const Recalibration r = MethodCRecalibrate(s, raw, rows);
    EXPECT_TRUE(r.triggered);
    for (std::size_t i = 0; i < rows.rows; ++i) {
      const double hat = s.Predict(rows.row(i))[0];
      const double phi = raw.at(i, 0);
      const double out = r.attrs.at(i, 0);
      if (alpha == 1.0) {
        EXPECT_EQ(out, hat);
      } else {
        EXPECT_NEAR(out, 0.5 * (phi + hat), 1e-12);
        EXPECT_GE(out, std::min(phi, hat) - 1e-15);
        EXPECT_LE(out, std::max(phi, hat) + 1e-15);
      }
    }
  }
}

}  // namespace
}  // namespace driftscope
