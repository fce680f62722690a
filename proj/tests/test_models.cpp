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
#include <set>
#include <vector>

#include "driftscope/encoding.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/forest.hpp"
#include "driftscope/gbdt.hpp"
#include "driftscope/logistic.hpp"
#include "driftscope/metrics.hpp"
#include "driftscope/model_io.hpp"
#include "driftscope/rng.hpp"
#include "driftscope/training.hpp"
#include "test_support.hpp"

namespace driftscope {
namespace {

EncodedMatrix Matrix(const std::vector<std::vector<double>>& rows,
                     const std::vector<std::string>& names) {
  EncodedMatrix m;
  m.rows = rows.size();
  m.cols = names.size();
  m.columns = ColumnMap::Numeric(names);
  for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
  return m;
}

// Brute-force pair counting, ties count one half.
double PairAuc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
  }
  return wins / pairs;
}

TEST(Encoding, DefaultPanelLayout) {
  const Schema& schema = Schema::Lending();
  const ColumnMap map = ModelColumnMap(schema);
  EXPECT_EQ(map.block_count(), 12u);
  // Sum of (levels - 1) over categoricals plus one per numeric feature.
  std::size_t expected = 0;
  for (std::size_t f : schema.ModelFeatures()) {
    const FeatureSpec& spec = schema.feature(f);
    expected += spec.is_categorical() ? spec.levels.size() - 1 : 1;
  }
  EXPECT_EQ(map.size(), expected);
  EXPECT_EQ(map.size(), 15u);
  for (const EncodedColumn& c : map.columns()) {
    EXPECT_FALSE(schema.feature(c.feature).sensitive);
  }
}

TEST(Encoding, ReferenceLevelIsAllZero) {
  const Schema& schema = Schema::Lending();
  const ColumnMap map = ModelColumnMap(schema);
  LoanRecord r;
  r[kEmploymentStatus] = kEmployed;
  r[kAnnualIncome] = 50000;
  std::vector<double> out(map.size());
  EncodeRow(r, map, schema, out);
  std::size_t employment_columns = 0;
  for (std::size_t c = 0; c < map.size(); ++c) {
    if (map.columns()[c].feature == kEmploymentStatus) {
      ++employment_columns;
      EXPECT_EQ(out[c], 0.0);
    }
  }
  EXPECT_EQ(employment_columns, 2u);
  r[kEmploymentStatus] = kSelfEmployed;
  EncodeRow(r, map, schema, out);
  double sum = 0.0;
  for (std::size_t c = 0; c < map.size(); ++c) {
    if (map.columns()[c].feature == kEmploymentStatus) sum += out[c];
  }
  EXPECT_EQ(sum, 1.0);
}

TEST(Encoding, UnknownLevelNamesFeatureAndLevel) {
  const Schema& schema = Schema::Lending();
  const ColumnMap map = ModelColumnMap(schema);
  LoanRecord r;
  r[kRegion] = 9;
  std::vector<double> out(map.size());
  try {
    EncodeRow(r, map, schema, out);
    FAIL() << "expected EncodingError";
  } catch (const EncodingError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("region"), std::string::npos);
    EXPECT_NE(what.find('9'), std::string::npos);
  }
  EXPECT_THROW(schema.LevelIndex(kRegion, "atlantis"), EncodingError);
}

TEST(Auc, Fixtures) {
  EXPECT_EQ(Auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}),
            1.0);
  EXPECT_EQ(Auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{0, 1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(
      Auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}),
      0.75);
  EXPECT_THROW(Auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}),
               DegenerateError);
}

TEST(Auc, MatchesPairCountingAndIsRankInvariant) {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterRng rng({0xA0C, trial});
    const std::size_t n = 4 + rng.Below(40);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.Below(10)) / 10.0;
      y[i] = static_cast<int>(rng.Below(2));
    }
    y[0] = 0;
    y[1] = 1;
    const double auc = Auc(s, y);
    EXPECT_NEAR(auc, PairAuc(s, y), 1e-12);
    std::vector<double> e(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = std::exp(s[i]);
      a[i] = 3.0 * s[i] - 7.0;
    }
    EXPECT_NEAR(Auc(e, y), auc, 1e-12);
    EXPECT_NEAR(Auc(a, y), auc, 1e-12);
  }
}

TEST(ClassificationMetrics, Fixtures) {
  ModelMetrics m = ClassificationMetrics(std::vector<double>{0.9, 0.1, 0.8, 0.2},
                                         std::vector<int>{1, 0, 1, 0});
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);

  m = ClassificationMetrics(std::vector<double>{0.1, 0.2, 0.3}, std::vector<int>{1, 0, 1});
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);

  // TP = 2, FP = 1, FN = 1, TN = 1.
  m = ClassificationMetrics(std::vector<double>{0.9, 0.8, 0.7, 0.2, 0.1},
                            std::vector<int>{1, 1, 0, 1, 0});
  EXPECT_NEAR(m.precision, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(m.recall, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-9);
  EXPECT_EQ(m.threshold, 0.5);
}

TEST(Gbdt, PriorOnlyModel) {
  const EncodedMatrix x = Matrix({{0}, {1}, {2}, {3}}, {"x"});
  const std::vector<int> y = {0, 1, 0, 0};
  GbdtParams params;
  params.n_trees = 0;
  const GbdtModel model = FitGbdt(x, y, params);
  EXPECT_TRUE(model.trees().empty());
  for (double p : model.PredictProba(x)) EXPECT_NEAR(p, 0.25, 1e-12);
  EXPECT_NEAR(model.base_score(), std::log(0.25 / 0.75), 1e-12);
}

TEST(Gbdt, SeparableStumps) {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({static_cast<double>(i)});
    y.push_back(i >= 50);
  }
  const EncodedMatrix x = Matrix(rows, {"x"});
  GbdtParams params;
  params.n_trees = 10;
  params.max_depth = 1;
  params.min_leaf = 1;
  params.subsample = 1.0;
  const GbdtModel model = FitGbdt(x, y, params);
  EXPECT_EQ(Auc(model.PredictProba(x), y), 1.0);
}

TEST(Gbdt, LearnsXor) {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  CounterRng rng(0x707);
  for (int i = 0; i < 400; ++i) {
    const double a = rng.Uniform(), b = rng.Uniform();
    rows.push_back({a, b});
    y.push_back((a > 0.5) != (b > 0.5));
  }
  const EncodedMatrix x = Matrix(rows, {"a", "b"});
  GbdtParams params;
  params.n_trees = 50;
  params.max_depth = 2;
  params.min_leaf = 5;
  params.learning_rate = 0.3;
  params.subsample = 1.0;
  const GbdtModel model = FitGbdt(x, y, params);
  const auto p = model.PredictProba(x);
  int correct = 0;
  for (std::size_t i = 0; i < p.size(); ++i) correct += (p[i] >= 0.5) == (y[i] == 1);
  EXPECT_GE(correct / 400.0, 0.95);
}

TEST(Gbdt, TrainingLossNonIncreasingWithoutSubsampling) {
  const Panel& panel = testing::DefaultPanel();
  const auto& records = panel.Slice(2015).records;
  const EncodedMatrix x = Encode(records, panel.schema());
  GbdtParams params;
  params.n_trees = 40;
  params.subsample = 1.0;
  const GbdtModel model = FitGbdt(x, Labels(records), params);
  const auto& loss = model.training_loss();
  ASSERT_EQ(loss.size(), 41u);
  for (std::size_t i = 1; i < loss.size(); ++i) EXPECT_LE(loss[i], loss[i - 1] + 1e-12);
}

TEST(Gbdt, SingleClassIsDegenerate) {
  const EncodedMatrix x = Matrix({{0}, {1}}, {"x"});
  EXPECT_THROW(FitGbdt(x, std::vector<int>{1, 1}), DegenerateError);
}

TEST(Gbdt, StumpPrediction) {
  Tree stump;
  stump.nodes = {TreeNode{0, 1.5, 1, 2, 0.0}, TreeNode{-1, 0, -1, -1, -0.4},
                 TreeNode{-1, 0, -1, -1, 0.6}};
  const GbdtModel model(0.2, 0.1, {stump}, ColumnMap::Numeric({"x"}));
  EXPECT_NEAR(model.PredictProba(std::vector<double>{1.0}),
              1.0 / (1.0 + std::exp(-(0.2 + 0.1 * -0.4))), 1e-15);
  EXPECT_NEAR(model.PredictProba(std::vector<double>{1.5}),
              1.0 / (1.0 + std::exp(-(0.2 + 0.1 * 0.6))), 1e-15);
  const GbdtModel empty(0.2, 0.1, {}, ColumnMap::Numeric({"x"}));
  EXPECT_NEAR(empty.PredictProba(std::vector<double>{3.0}),
              1.0 / (1.0 + std::exp(-0.2)), 1e-15);
}

TEST(Gbdt, SerializedFixtureMatchesHandTrace) {
  // Depth-2 tree on (income, score) plus a stump on score.
  const nlohmann::json doc = nlohmann::json::parse(R"({
    "kind": "gbdt", "base_score": -1.0, "learning_rate": 0.5,
    "columns": [{"name": "annual_income", "feature": 0, "level": -1},
                {"name": "credit_score", "feature": 1, "level": -1}],
    "trees": [
      [{"column": 0, "threshold": 0.5, "left": 1, "right": 2},
       {"column": 1, "threshold": 2.0, "left": 3, "right": 4},
       {"leaf": 0.8}, {"leaf": -0.3}, {"leaf": 0.1}],
      [{"column": 1, "threshold": 1.0, "left": 1, "right": 2},
       {"leaf": 0.25}, {"leaf": -0.5}]
    ]})");
  const GbdtModel model = GbdtFromJson(doc, "fixture");
  // Row (0.2, 3.0): tree 1 col0 < 0.5 -> col1 >= 2 -> 0.1; tree 2 col1 >= 1 -> -0.5.
  const double margin = -1.0 + 0.5 * (0.1 - 0.5);
  EXPECT_NEAR(model.PredictProba(std::vector<double>{0.2, 3.0}),
              1.0 / (1.0 + std::exp(-margin)), 1e-12);
  // Row (0.7, 0.0): 0.8 and 0.25.
  EXPECT_NEAR(model.PredictProba(std::vector<double>{0.7, 0.0}),
              1.0 / (1.0 + std::exp(-(-1.0 + 0.5 * 1.05))), 1e-12);
  // Serialization round trip keeps field order and values.
  EXPECT_EQ(GbdtToJson(GbdtFromJson(GbdtToJson(model), "rt")).dump(),
            GbdtToJson(model).dump());
  EXPECT_THROW(GbdtFromJson(nlohmann::json::parse(R"({"kind": "gbdt"})"), "bad"),
               ParseError);
}

TEST(Gbdt, ShapeMismatchAndPurity) {
  const Panel& panel = testing::DefaultPanel();
  const auto& records = panel.Slice(2015).records;
  const EncodedMatrix x = Encode(records, panel.schema());
  GbdtParams params;
  params.n_trees = 10;
  const GbdtModel model = FitGbdt(x, Labels(records), params);
  const auto p1 = model.PredictProba(x);
  const auto p2 = model.PredictProba(x);
  EXPECT_EQ(p1, p2);
  for (double p : p1) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
  const EncodedMatrix narrow = Matrix({{1.0}}, {"x"});
  EXPECT_THROW(model.PredictProba(narrow), ShapeError);
  // Same seed, same model.
  EXPECT_EQ(GbdtToJson(FitGbdt(x, Labels(records), params)).dump(),
            GbdtToJson(model).dump());
  for (const Tree& t : model.trees()) {
    EXPECT_LE(t.depth(), params.max_depth);
    for (int c : t.SplitColumns()) EXPECT_LT(static_cast<std::size_t>(c), x.cols);
  }
}

TEST(Logistic, NullSignalShrinks) {
  CounterRng rng(0x1091);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 5000; ++i) {
    rows.push_back({rng.Normal(), rng.Normal(), rng.Uniform()});
    y.push_back(rng.Bernoulli(0.5));
  }
  const LogisticModel model = FitLogistic(Matrix(rows, {"a", "b", "c"}), y);
  for (double w : model.standardized_weights()) EXPECT_LE(std::abs(w), 0.1);
  EXPECT_LE(model.gradient_norm(), 1e-8 * 5000);
}

TEST(Logistic, RecoversSlope) {
  CounterRng rng(0x5109);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 20000; ++i) {
    const double x = rng.Normal();
    rows.push_back({x});
    y.push_back(rng.Bernoulli(1.0 / (1.0 + std::exp(-2.0 * x))));
  }
  LogisticParams params;
  params.l2 = 1e-6;
  const LogisticModel model = FitLogistic(Matrix(rows, {"x"}), y, params);
  EXPECT_NEAR(model.coefficients()[0], 2.0, 0.1);
}

TEST(Logistic, SeparableWithoutPenaltyFails) {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({static_cast<double>(i)});
    y.push_back(i >= 20);
  }
  LogisticParams params;
  params.l2 = 0.0;
  try {
    FitLogistic(Matrix(rows, {"x"}), y, params);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("gradient"), std::string::npos);
  }
}

TEST(Forest, SingleTreeEqualsDecisionTree) {
  const Panel& panel = testing::DefaultPanel();
  const auto& records = panel.Slice(2016).records;
  const EncodedMatrix x = Encode(records, panel.schema());
  const auto y = Labels(records);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  params.feature_subsample = false;
  const ForestModel forest = FitRandomForest(x, y, params);
  const std::vector<double> ones(x.rows, 1.0);
  const Tree tree = FitClassificationTree(x, y, ones, params.max_depth, params.min_leaf);
  for (std::size_t i = 0; i < x.rows; ++i) {
    EXPECT_EQ(forest.PredictProba(x.row(i)), tree.Predict(x.row(i)));
  }
}

TEST(Forest, SeparableDataIsPerfectlyRanked) {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    rows.push_back({static_cast<double>(i), static_cast<double>(i % 7)});
    y.push_back(i >= 30);
  }
  ForestParams params;
  params.n_trees = 20;
  params.min_leaf = 1;
  const EncodedMatrix x = Matrix(rows, {"x", "noise"});
  EXPECT_EQ(Auc(FitRandomForest(x, y, params).PredictProba(x), y), 1.0);
}

TEST(ExpandingWindow, WindowsAndLeakCheck) {
  GeneratorConfig config;
  config.rows_per_year = 200;
  const Panel panel = GeneratePanel(config);
  ModelParams params;
  params.gbdt.n_trees = 5;
  const auto models = ExpandingWindowTrain(panel, ModelKind::kGbdt, params);
  ASSERT_EQ(models.size(), 9u);
  EXPECT_EQ(models.front().test_year, 2016);
  EXPECT_EQ(models.front().train_years, std::vector<int>{2015});
  const WindowModel& m2020 = models[4];
  EXPECT_EQ(m2020.test_year, 2020);
  EXPECT_EQ(m2020.train_years, (std::vector<int>{2015, 2016, 2017, 2018, 2019}));
  EXPECT_EQ(m2020.train_keys.size(), 5u * 200u);
  for (const WindowModel& m : models) {
    for (const auto& [year, row] : m.train_keys) EXPECT_LT(year, m.test_year);
    const std::set<std::pair<int, int>> keys(m.train_keys.begin(), m.train_keys.end());
    EXPECT_EQ(keys.size(), m.train_keys.size());
  }
}

TEST(ExpandingWindow, SingleYearIsInputError) {
  GeneratorConfig config;
  config.years = {2015};
  config.rows_per_year = 100;
  EXPECT_THROW(ExpandingWindowTrain(GeneratePanel(config), ModelKind::kGbdt, {}),
               InputError);
}

TEST(ExpandingWindow, DefaultPanelAucBand) {
  const Panel& panel = testing::DefaultPanel();
  const auto models = ExpandingWindowTrain(panel, ModelKind::kGbdt, {});
  for (const WindowModel& m : models) {
    const auto& test = panel.Slice(m.test_year).records;
    const ModelMetrics metrics = ClassificationMetrics(
        m.model->PredictProba(Encode(test, panel.schema())), Labels(test));
    EXPECT_GE(metrics.auc, 0.58) << m.test_year;
    EXPECT_LE(metrics.auc, 0.72) << m.test_year;
    EXPECT_LE(metrics.f1, 0.2) << m.test_year;
  }
}

TEST(ModelKinds, ParseAndName) {
  for (ModelKind k : {ModelKind::kGbdt, ModelKind::kLogistic, ModelKind::kForest}) {
    EXPECT_EQ(ParseModelKind(ModelKindName(k)), k);
  }
  EXPECT_THROW(ParseModelKind("svm"), ConfigError);
}

}  // namespace
}  // namespace driftscope
