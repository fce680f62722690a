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
#include "driftscope/training.hpp"
#include "test_support.hpp"

namespace driftscope {
namespace {

// f(x) = sum_k w_k x_k, reported as the "probability".
class LinearPredictor : public Predictor {
 public:
  LinearPredictor(std::vector<double> w, std::vector<std::string> names)
      : w_(std::move(w)), columns_(ColumnMap::Numeric(names)) {}
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

EncodedMatrix RandomMatrix(std::size_t rows, const ColumnMap& map, std::uint64_t key) {
  EncodedMatrix m;
  m.rows = rows;
  m.cols = map.size();
  m.columns = map;
  CounterRng rng(key);
  m.data.resize(rows * m.cols);
  for (double& v : m.data) v = rng.Normal();
  return m;
}

// Interventional value by explicit splicing, written independently of the
// library: players in `mask` take the instance's block values.
double BruteValue(const Predictor& model, std::span<const double> x,
                  const EncodedMatrix& bg, std::uint64_t mask) {
  const ColumnMap& map = model.columns();
  double total = 0.0;
  std::vector<double> row(map.size());
  for (std::size_t b = 0; b < bg.rows; ++b) {
    for (std::size_t c = 0; c < map.size(); ++c) {
      const bool present = (mask >> map.column_owner()[c]) & 1U;
      row[c] = present ? x[c] : bg.at(b, c);
    }
    total += model.PredictProba(row);
  }
  return total / static_cast<double>(bg.rows);
}

// Shapley by averaging marginal contributions over every player order.
std::vector<double> BruteShapley(const Predictor& model, std::span<const double> x,
                                 const EncodedMatrix& bg) {
  const std::size_t m = model.columns().block_count();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> phi(m, 0.0);
  double orders = 0.0;
  do {
    std::uint64_t mask = 0;
    double prev = BruteValue(model, x, bg, 0);
    for (std::size_t p : order) {
      mask |= std::uint64_t{1} << p;
      const double next = BruteValue(model, x, bg, mask);
      phi[p] += next - prev;
      prev = next;
    }
    orders += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= orders;
  return phi;
}

// GBDT on four schema features (two categoricals), trained on a small
// slice of the default panel.
struct SmallGbdt {
  ColumnMap map;
  GbdtModel model;
  EncodedMatrix x;
};

const SmallGbdt& Small() {
  static const SmallGbdt fixture = [] {
    const Panel& panel = testing::DefaultPanel();
    const Schema& schema = panel.schema();
    SmallGbdt f;
    f.map = ColumnMap(schema, {kAnnualIncome, kEmploymentStatus, kDti, kRegion});
    const auto& records = panel.Slice(2020).records;
    f.x = Encode(records, schema, f.map);
    GbdtParams params;
    params.n_trees = 30;
    f.model = FitGbdt(f.x, Labels(records), params);
    return f;
  }();
  return fixture;
}

EncodedMatrix Rows(const EncodedMatrix& x, std::size_t first, std::size_t count) {
  EncodedMatrix out;
  out.rows = count;
  out.cols = x.cols;
  out.columns = x.columns;
  out.data.assign(x.data.begin() + static_cast<long>(first * x.cols),
                  x.data.begin() + static_cast<long>((first + count) * x.cols));
  return out;
}

TEST(Shapley, TreeTablesMatchBruteForce) {
  const SmallGbdt& f = Small();
  const EncodedMatrix bg = Rows(f.x, 100, 16);
  const EncodedMatrix inst = Rows(f.x, 0, 8);
  ASSERT_EQ(f.map.block_count(), 4u);
  const AttributionMatrix attrs = ExplainRows(f.model, inst, bg);
  for (std::size_t i = 0; i < inst.rows; ++i) {
    const auto expected = BruteShapley(f.model, inst.row(i), bg);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(attrs.at(i, j), expected[j], 1e-12);
    EXPECT_NEAR(attrs.base_value, BruteValue(f.model, inst.row(i), bg, 0), 1e-12);
  }
}

TEST(Shapley, SplicedValueMatchesTreeTables) {
  const SmallGbdt& f = Small();
  const EncodedMatrix bg = Rows(f.x, 300, 20);
  const auto x = f.x.row(7);
  const TreeEnsembleValue tables(f.model, x, bg);
  const SplicedValue spliced(f.model, f.map, x, bg);
  for (Coalition s = 0; s < 16; ++s) EXPECT_NEAR(tables.Value(s), spliced.Value(s), 1e-12);
}

TEST(Shapley, EfficiencyOnDefaultPanel) {
  const Panel& panel = testing::DefaultPanel();
  const auto& train = panel.Slice(2016).records;
  const EncodedMatrix x = Encode(train, panel.schema());
  GbdtParams params;
  params.n_trees = 40;
  const GbdtModel model = FitGbdt(x, Labels(train), params);
  const BackgroundSet bg = StaticBackground(panel, 2017, 64, 5);
  const auto& test = panel.Slice(2017).records;
  const std::vector<LoanRecord> inst(test.begin(), test.begin() + 40);
  const AttributionMatrix attrs = Explain(model, inst, bg, panel.schema());
  ASSERT_EQ(attrs.cols(), 12u);
  for (std::size_t i = 0; i < attrs.rows(); ++i) {
    const auto row = attrs.row(i);
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    EXPECT_NEAR(sum, attrs.outputs[i] - attrs.base_value, 1e-9);
  }
}

TEST(Shapley, DummyFeatureGetsExactZero) {
  // Trees split on a and b only; c is a dummy.
  Tree t1;
  t1.nodes = {TreeNode{0, 0.0, 1, 2, 0}, TreeNode{-1, 0, -1, -1, -0.5},
              TreeNode{1, 0.3, 3, 4, 0}, TreeNode{-1, 0, -1, -1, 0.2},
              TreeNode{-1, 0, -1, -1, 0.9}};
  Tree t2;
  t2.nodes = {TreeNode{1, -0.2, 1, 2, 0}, TreeNode{-1, 0, -1, -1, 0.4},
              TreeNode{-1, 0, -1, -1, -0.1}};
  const GbdtModel model(-0.3, 0.5, {t1, t2}, ColumnMap::Numeric({"a", "b", "c"}));
  const EncodedMatrix bg = RandomMatrix(30, model.columns(), 11);
  const EncodedMatrix inst = RandomMatrix(25, model.columns(), 12);
  const AttributionMatrix attrs = ExplainRows(model, inst, bg);
  for (std::size_t i = 0; i < inst.rows; ++i) EXPECT_EQ(attrs.at(i, 2), 0.0);
}

TEST(Shapley, SymmetricFeaturesGetEqualShares) {
  // f depends on a and b through mirrored stumps; the background is closed
  // under swapping a and b.
  Tree ta;
  ta.nodes = {TreeNode{0, 0.5, 1, 2, 0}, TreeNode{-1, 0, -1, -1, 0.0},
              TreeNode{-1, 0, -1, -1, 1.0}};
  Tree tb;
  tb.nodes = {TreeNode{1, 0.5, 1, 2, 0}, TreeNode{-1, 0, -1, -1, 0.0},
              TreeNode{-1, 0, -1, -1, 1.0}};
  const GbdtModel model(0.0, 1.0, {ta, tb}, ColumnMap::Numeric({"a", "b"}));
  EncodedMatrix bg;
  bg.rows = 4;
  bg.cols = 2;
  bg.columns = model.columns();
  bg.data = {0, 0, 0.2, 0.2, 1, 0, 0, 1};
  EncodedMatrix inst = bg;
  inst.rows = 1;
  inst.data = {1, 1};
  const AttributionMatrix attrs = ExplainRows(model, inst, bg);
  EXPECT_NEAR(attrs.at(0, 0), attrs.at(0, 1), 1e-15);
  EXPECT_GT(attrs.at(0, 0), 0.0);
}

TEST(Shapley, LinearModelClosedForm) {
  const LinearPredictor model({0.5, -1.25, 2.0, 0.0, 0.75}, {"a", "b", "c", "d", "e"});
  const EncodedMatrix bg = RandomMatrix(64, model.columns(), 21);
  const EncodedMatrix inst = RandomMatrix(10, model.columns(), 22);
  std::vector<double> mean(5, 0.0);
  for (std::size_t b = 0; b < bg.rows; ++b) {
    for (std::size_t j = 0; j < 5; ++j) mean[j] += bg.at(b, j) / 64.0;
  }
  const std::vector<double> w = {0.5, -1.25, 2.0, 0.0, 0.75};
  ExplainOptions exact;
  exact.mode = ShapleyMode::kExact;
  ExplainOptions sampled;
  sampled.mode = ShapleyMode::kSampled;
  sampled.n_permutations = 200;
  const AttributionMatrix a = ExplainRows(model, inst, bg, exact);
  const AttributionMatrix s = ExplainRows(model, inst, bg, sampled);
  for (std::size_t i = 0; i < inst.rows; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double closed = w[j] * (inst.at(i, j) - mean[j]);
      EXPECT_NEAR(a.at(i, j), closed, 1e-9);
      EXPECT_NEAR(s.at(i, j), closed, 0.02);
    }
  }
}

TEST(Shapley, SinglePlayerIsEfficiency) {
  const LinearPredictor model({3.0}, {"a"});
  const EncodedMatrix bg = RandomMatrix(10, model.columns(), 31);
  const EncodedMatrix inst = RandomMatrix(3, model.columns(), 32);
  const AttributionMatrix a = ExplainRows(model, inst, bg);
  for (std::size_t i = 0; i < inst.rows; ++i) {
    EXPECT_NEAR(a.at(i, 0), a.outputs[i] - a.base_value, 1e-12);
  }
}

TEST(Shapley, ExhaustivePermutationsAreExact) {
  const Panel& panel = testing::DefaultPanel();
  const ColumnMap map(panel.schema(), {kCreditScore, kEmploymentStatus, kLoanAmount});
  const auto& records = panel.Slice(2019).records;
  const EncodedMatrix x = Encode(records, panel.schema(), map);
  GbdtParams params;
  params.n_trees = 20;
  const GbdtModel model = FitGbdt(x, Labels(records), params);
  const EncodedMatrix bg = Rows(x, 500, 12);
  for (std::size_t i = 0; i < 5; ++i) {
    const TreeEnsembleValue value(model, x.row(i), bg);
    const ShapleyRow exact = ShapleyExact(value);
    const ShapleyRow sampled = ShapleySampled(value, 6, 99);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(sampled.phi[j], exact.phi[j], 1e-9);
  }
}

TEST(Shapley, SampledIsDeterministicAndConverges) {
  const Panel& panel = testing::DefaultPanel();
  const Schema& schema = panel.schema();
  const ColumnMap map(schema, {kAnnualIncome, kCreditScore, kAge, kEmploymentStatus,
                               kDti, kLoanAmount, kCreditUtilization, kRegion});
  ASSERT_EQ(map.block_count(), 8u);
  const auto& records = panel.Slice(2018).records;
  const EncodedMatrix x = Encode(records, schema, map);
  GbdtParams params;
  params.n_trees = 40;
  const GbdtModel model = FitGbdt(x, Labels(records), params);
  const EncodedMatrix bg = Rows(x, 1000, 32);
  const EncodedMatrix inst = Rows(x, 0, 20);
  ExplainOptions exact;
  const AttributionMatrix truth = ExplainRows(model, inst, bg, exact);
  double previous = 1e300;
  for (int n : {50, 100, 200, 400}) {
    ExplainOptions opt;
    opt.mode = ShapleyMode::kSampled;
    opt.n_permutations = n;
    opt.seed = 5;
    const AttributionMatrix a = ExplainRows(model, inst, bg, opt);
    const AttributionMatrix b = ExplainRows(model, inst, bg, opt);
    EXPECT_EQ(a.phi, b.phi);
    double mae = 0.0;
    for (std::size_t k = 0; k < a.phi.size(); ++k) mae += std::abs(a.phi[k] - truth.phi[k]);
    mae /= static_cast<double>(a.phi.size());
    EXPECT_LT(mae, previous) << n;
    previous = mae;
    // Sampled rows still satisfy efficiency: each order telescopes.
    for (std::size_t i = 0; i < inst.rows; ++i) {
      const auto row = a.row(i);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0),
                  a.outputs[i] - a.base_value, 1e-9);
    }
  }
}

TEST(Shapley, LinearInModelOnMarginScale) {
  const SmallGbdt& f = Small();
  const auto& trees = f.model.trees();
  const std::size_t half = trees.size() / 2;
  const GbdtModel first(0.3, 0.1, {trees.begin(), trees.begin() + static_cast<long>(half)},
                        f.map);
  const GbdtModel second(-0.8, 0.1, {trees.begin() + static_cast<long>(half), trees.end()},
                         f.map);
  const GbdtModel both(-0.5, 0.1, trees, f.map);
  const EncodedMatrix bg = Rows(f.x, 40, 25);
  const EncodedMatrix inst = Rows(f.x, 900, 10);
  ExplainOptions opt;
  opt.scale = OutputScale::kMargin;
  const AttributionMatrix a = ExplainRows(first, inst, bg, opt);
  const AttributionMatrix b = ExplainRows(second, inst, bg, opt);
  const AttributionMatrix ab = ExplainRows(both, inst, bg, opt);
  for (std::size_t k = 0; k < ab.phi.size(); ++k) {
    EXPECT_NEAR(ab.phi[k], a.phi[k] + b.phi[k], 1e-9);
  }
}

TEST(Shapley, ErrorsAndLimits) {
  const LinearPredictor model({1.0, 2.0}, {"a", "b"});
  EncodedMatrix empty;
  empty.cols = 2;
  empty.columns = model.columns();
  const EncodedMatrix inst = RandomMatrix(2, model.columns(), 41);
  EXPECT_THROW(ExplainRows(model, inst, empty), InputError);

  std::vector<std::string> names;
  for (int i = 0; i < 15; ++i) names.push_back("f" + std::to_string(i));
  const LinearPredictor wide(std::vector<double>(15, 1.0), names);
  const EncodedMatrix wbg = RandomMatrix(4, wide.columns(), 42);
  const EncodedMatrix winst = RandomMatrix(1, wide.columns(), 43);
  ExplainOptions exact;
  exact.mode = ShapleyMode::kExact;
  EXPECT_THROW(ExplainRows(wide, winst, wbg, exact), InputError);
  // Auto mode falls back to sampling above the exact limit.
  ExplainOptions automatic;
  automatic.n_permutations = 20;
  const AttributionMatrix a = ExplainRows(wide, winst, wbg, automatic);
  EXPECT_EQ(a.cols(), 15u);
}

TEST(Importance, MeanAbsolute) {
  AttributionMatrix attrs;
  attrs.features = {"a", "b"};
  attrs.instance_ids = {0};
  attrs.phi = {-0.3, 0.2};
  ImportanceVector v = MeanAbsImportance(attrs);
  EXPECT_EQ(v.values, (std::vector<double>{0.3, 0.2}));
  attrs.instance_ids = {0, 1};
  attrs.phi = {0.1, 0.0, -0.1, 0.0};
  v = MeanAbsImportance(attrs);
  EXPECT_NEAR(v.values[0], 0.1, 1e-15);
  AttributionMatrix empty;
  empty.features = {"a"};
  EXPECT_THROW(MeanAbsImportance(empty), InputError);
}

}  // namespace
}  // namespace driftscope
