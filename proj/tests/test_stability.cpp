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

#include "driftscope/errors.hpp"
#include "driftscope/rng.hpp"
#include "driftscope/stability.hpp"

namespace driftscope {
namespace {

// Tau-b from explicit pair counts.
double BruteTauB(const std::vector<double>& u, const std::vector<double>& v) {
  double concordant = 0, discordant = 0, ties_u = 0, ties_v = 0, pairs = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      pairs += 1;
      const double du = u[i] - u[j], dv = v[i] - v[j];
      if (du == 0) ties_u += 1;
      if (dv == 0) ties_v += 1;
      if (du * dv > 0) concordant += 1;
      if (du * dv < 0) discordant += 1;
    }
  }
  return (concordant - discordant) / std::sqrt((pairs - ties_u) * (pairs - ties_v));
}

std::vector<std::string> Names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::string(1, static_cast<char>('a' + i)));
  return out;
}

TEST(Cosine, Fixtures) {
  const std::vector<double> u = {1, 2, 3};
  EXPECT_NEAR(CosineSimilarity(u, u).value, 1.0, 1e-12);
  EXPECT_EQ(CosineSimilarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}).value, 0.0);
  EXPECT_NEAR(CosineSimilarity(u, std::vector<double>{3, 2, 1}).value, 10.0 / 14.0, 1e-12);
  const CosineResult zero = CosineSimilarity(u, std::vector<double>{0, 0, 0});
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_TRUE(zero.degenerate);
  EXPECT_THROW(CosineSimilarity(std::vector<double>{0, 0}, std::vector<double>{0, 0}),
               DegenerateError);
  EXPECT_THROW(CosineSimilarity(u, std::vector<double>{1, 2}), ShapeError);
}

TEST(KendallTau, Fixtures) {
  const std::vector<double> u = {1, 2, 3, 4};
  EXPECT_NEAR(KendallTauB(u, u), 1.0, 1e-15);
  EXPECT_NEAR(KendallTauB(u, std::vector<double>{4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(KendallTauB(u, std::vector<double>{2, 1, 3, 4}), 4.0 / 6.0, 1e-9);
  EXPECT_THROW(KendallTauB(u, std::vector<double>{5, 5, 5, 5}), DegenerateError);
  EXPECT_THROW(KendallTauB(std::vector<double>{1}, std::vector<double>{1}), InputError);
}

TEST(KendallTau, MatchesPairCountsWithTies) {
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    CounterRng rng({0x7A0, trial});
    const std::size_t n = 2 + rng.Below(14);
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = static_cast<double>(rng.Below(5));
      v[i] = static_cast<double>(rng.Below(5));
    }
    if (std::all_of(u.begin(), u.end(), [&](double x) { return x == u[0]; }) ||
        std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) {
      continue;
    }
    const double tau = KendallTauB(u, v);
    EXPECT_NEAR(tau, BruteTauB(u, v), 1e-12);
    EXPECT_NEAR(tau, KendallTauB(v, u), 1e-12);
    std::vector<double> tu(n), tv(n);
    for (std::size_t i = 0; i < n; ++i) {
      tu[i] = std::exp(u[i]);
      tv[i] = 2.0 * v[i] + 1.0;
    }
    EXPECT_NEAR(KendallTauB(tu, tv), tau, 1e-12);
  }
}

TEST(Jaccard, Fixtures) {
  const auto names = Names(12);
  std::vector<double> u(12), v(12);
  for (std::size_t i = 0; i < 12; ++i) {
    u[i] = 12.0 - static_cast<double>(i);
    v[i] = u[i];
  }
  EXPECT_EQ(JaccardTopK(u, v, names, 10), 1.0);
  // Swap two top-10 members out for the two outsiders: 8 shared of 12.
  std::swap(v[0], v[10]);
  std::swap(v[1], v[11]);
  EXPECT_NEAR(JaccardTopK(u, v, names, 10), 8.0 / 12.0, 1e-15);
  // Disjoint top-3 sets with 2k <= m.
  std::vector<double> a(6, 0.0), b(6, 0.0);
  a[0] = a[1] = a[2] = 1.0;
  b[3] = b[4] = b[5] = 1.0;
  EXPECT_EQ(JaccardTopK(a, b, Names(6), 3), 0.0);
  EXPECT_THROW(JaccardTopK(u, v, names, 13), InputError);
}

TEST(TopK, TieBreakByName) {
  const std::vector<std::string> names = {"delta", "alpha", "charlie", "bravo"};
  const std::vector<double> values = {1.0, 1.0, 2.0, 1.0};
  EXPECT_EQ(TopK(values, names, 2), (std::vector<std::size_t>{2, 1}));
}

TEST(Stability, PropertiesOnRandomVectors) {
  const auto names = Names(12);
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    CounterRng rng({0x57AB, trial});
    std::vector<double> u(12), v(12);
    for (std::size_t i = 0; i < 12; ++i) {
      u[i] = rng.Uniform();
      v[i] = rng.Uniform();
    }
    const double c = 0.1 + 10.0 * rng.Uniform();
    std::vector<double> cu(12), tu(12), tv(12);
    for (std::size_t i = 0; i < 12; ++i) {
      cu[i] = c * u[i];
      tu[i] = std::log1p(u[i]) * 3.0;
      tv[i] = std::log1p(v[i]) * 3.0;
    }
    EXPECT_NEAR(CosineSimilarity(u, cu).value, 1.0, 1e-12);
    EXPECT_NEAR(CosineSimilarity(u, v).value, CosineSimilarity(v, u).value, 1e-12);
    EXPECT_GE(CosineSimilarity(u, v).value, 0.0);
    EXPECT_NEAR(KendallTauB(tu, tv), KendallTauB(u, v), 1e-12);
    for (std::size_t k : {1u, 5u, 10u}) {
      EXPECT_EQ(JaccardTopK(u, v, names, k), JaccardTopK(v, u, names, k));
      EXPECT_EQ(JaccardTopK(tu, tv, names, k), JaccardTopK(u, v, names, k));
    }
  }
}

TEST(StabilitySeries, ConstantImportance) {
  std::vector<ImportanceVector> vectors;
  for (int year = 2016; year <= 2024; ++year) {
    ImportanceVector v;
    v.year = year;
    v.features = Names(12);
    for (int i = 0; i < 12; ++i) v.values.push_back(1.0 + i);
    vectors.push_back(v);
  }
  const StabilitySeries s = ComputeStabilitySeries(vectors);
  ASSERT_EQ(s.points.size(), 8u);
  for (const StabilityPoint& p : s.points) {
    EXPECT_NEAR(p.cosine, 1.0, 1e-12);
    EXPECT_NEAR(p.kendall_tau, 1.0, 1e-12);
    EXPECT_EQ(p.jaccard, 1.0);
    EXPECT_EQ(p.year_to, p.year_from + 1);
  }
  vectors[3].features[0] = "renamed";
  EXPECT_THROW(ComputeStabilitySeries(vectors), ShapeError);
  EXPECT_THROW(ComputeStabilitySeries({vectors[0]}), InputError);
}

}  // namespace
}  // namespace driftscope
