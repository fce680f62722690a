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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "driftscope/encoding.hpp"
#include "driftscope/gbdt.hpp"
#include "driftscope/model.hpp"
#include "driftscope/schema.hpp"

namespace driftscope {

// Largest player count handled by full coalition enumeration.
inline constexpr std::size_t kMaxExactPlayers = 14;

using Coalition = std::uint64_t;

enum class BackgroundProvenance { kStaticTrain, kSlidingWindow };
std::string ProvenanceName(BackgroundProvenance p);

// Reference records that stand in for "absent" features. Records are kept
// in (year, row) order so equal sets give bit-equal expectations.
struct BackgroundSet {
  std::vector<LoanRecord> records;
  BackgroundProvenance provenance = BackgroundProvenance::kStaticTrain;

  std::size_t size() const { return records.size(); }
  void Canonicalize();
};

// Per-instance, per-feature attributions of one explanation method.
struct AttributionMatrix {
  int year = 0;
  std::string method = "baseline";
  std::vector<int> instance_ids;
  std::vector<std::string> features;
  std::vector<double> phi;      // rows x features, row-major
  std::vector<double> outputs;  // model output f(x) per instance
  double base_value = 0.0;

  std::size_t rows() const { return instance_ids.size(); }
  std::size_t cols() const { return features.size(); }
  double at(std::size_t i, std::size_t j) const { return phi[i * cols() + j]; }
  double& at(std::size_t i, std::size_t j) { return phi[i * cols() + j]; }
  std::span<const double> row(std::size_t i) const {
    return {phi.data() + i * cols(), cols()};
  }
};

struct ImportanceVector {
  int year = 0;
  std::string method = "baseline";
  std::vector<std::string> features;
  std::vector<double> values;
};

// v(S): expected model output when the players in S take the instance's
// values and the rest take background values.
class CoalitionValue {
 public:
  virtual ~CoalitionValue() = default;
  virtual std::size_t players() const = 0;
  virtual double Value(Coalition s) const = 0;
};

// Works for any Predictor by splicing composite rows.
class SplicedValue : public CoalitionValue {
 public:
  SplicedValue(const Predictor& model, const ColumnMap& players,
               std::span<const double> instance, const EncodedMatrix& background);
  std::size_t players() const override { return blocks_.size(); }
  double Value(Coalition s) const override;

 private:
  const Predictor& model_;
  std::vector<FeatureBlock> blocks_;
  std::vector<double> instance_;
  const EncodedMatrix& background_;
};

enum class OutputScale { kProbability, kMargin };

// Tree-ensemble value: trees are grouped by the players they split on and
// each group's leaf sums are tabulated for every local coalition and
// background row, so v(S) costs one table lookup per group and background
// row. Probability scale applies the sigmoid per background row.
class TreeEnsembleValue : public CoalitionValue {
 public:
  TreeEnsembleValue(const GbdtModel& model, std::span<const double> instance,
                    const EncodedMatrix& background,
                    OutputScale scale = OutputScale::kProbability);
  std::size_t players() const override { return players_; }
  double Value(Coalition s) const override;

 private:
  struct Group {
    std::vector<std::size_t> players;  // ascending
    std::vector<double> table;         // (1 << players.size()) x background
  };
  std::size_t players_;
  std::size_t rows_;
  double base_;
  OutputScale scale_;
  std::vector<Group> groups_;
};

struct ShapleyRow {
  std::vector<double> phi;
  double base_value = 0.0;  // v(empty)
  double full_value = 0.0;  // v(all players)
};

// Exact enumeration over all 2^m coalitions with weights s!(m-s-1)!/m!.
// Throws InputError when m > kMaxExactPlayers.
ShapleyRow ShapleyExact(const CoalitionValue& value);

// Antithetic permutation sampling (every drawn order is also used
// reversed). When n_permutations >= m! (m <= 10) every permutation is
// enumerated once instead, which is exact.
ShapleyRow ShapleySampled(const CoalitionValue& value, int n_permutations,
                          std::uint64_t seed);

enum class ShapleyMode { kAuto, kExact, kSampled };

struct ExplainOptions {
  ShapleyMode mode = ShapleyMode::kAuto;
  int n_permutations = 200;
  std::uint64_t seed = 17;
  OutputScale scale = OutputScale::kProbability;
};

// Explains every row of `instances` against `background`. Uses the tree
// tables for GBDT models and spliced rows otherwise. Rows are processed in
// parallel; output order matches input order.
AttributionMatrix ExplainRows(const Predictor& model, const EncodedMatrix& instances,
                              const EncodedMatrix& background,
                              const ExplainOptions& options = {});

// Raw-record front end: encodes instances and background with the model's
// column map. Throws InputError for an empty background.
AttributionMatrix Explain(const Predictor& model,
                          std::span<const LoanRecord> instances,
                          const BackgroundSet& background, const Schema& schema,
                          const ExplainOptions& options = {});

// entry_j = mean_i |phi_ij|. Throws InputError for an empty matrix.
ImportanceVector MeanAbsImportance(const AttributionMatrix& attrs);

}  // namespace driftscope
