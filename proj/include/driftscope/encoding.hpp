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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "driftscope/schema.hpp"

namespace driftscope {

// One encoded column: a numeric feature (level == -1) or the indicator of a
// non-reference level of a categorical feature.
struct EncodedColumn {
  std::size_t feature = 0;
  int level = -1;
  std::string name;
};

// Contiguous block of encoded columns belonging to one original feature.
// Blocks are the Shapley players: a categorical toggles as a whole.
struct FeatureBlock {
  std::size_t feature = 0;
  std::string name;
  std::size_t first = 0;
  std::size_t count = 0;
};

class ColumnMap {
 public:
  ColumnMap() = default;
  // Columns for the given schema features, in the given order; categoricals
  // expand to k-1 indicators (first level dropped).
  ColumnMap(const Schema& schema, const std::vector<std::size_t>& features);
  // Plain numeric layout, one column per name. Handy for fixtures.
  static ColumnMap Numeric(const std::vector<std::string>& names);

  const std::vector<EncodedColumn>& columns() const { return columns_; }
  const std::vector<FeatureBlock>& blocks() const { return blocks_; }
  std::size_t size() const { return columns_.size(); }
  std::size_t block_count() const { return blocks_.size(); }
  std::vector<std::string> feature_names() const;
  // Index of the block owning each encoded column.
  const std::vector<std::size_t>& column_owner() const { return owner_; }

  bool operator==(const ColumnMap& other) const;

 private:
  void Finish();

  std::vector<EncodedColumn> columns_;
  std::vector<FeatureBlock> blocks_;
  std::vector<std::size_t> owner_;
};

// Dense row-major matrix with its column map.
struct EncodedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  ColumnMap columns;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

ColumnMap ModelColumnMap(const Schema& schema, bool include_sensitive = false);

// Throws EncodingError naming the feature and level for out-of-range levels.
void EncodeRow(const LoanRecord& record, const ColumnMap& map,
               const Schema& schema, std::span<double> out);
EncodedMatrix Encode(std::span<const LoanRecord> records, const Schema& schema,
                     const ColumnMap& map);
EncodedMatrix Encode(std::span<const LoanRecord> records, const Schema& schema,
                     bool include_sensitive = false);

}  // namespace driftscope
