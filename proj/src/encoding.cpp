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

#include "driftscope/encoding.hpp"

#include "driftscope/errors.hpp"

namespace driftscope {

ColumnMap::ColumnMap(const Schema& schema,
                     const std::vector<std::size_t>& features) {
  for (std::size_t f : features) {
    const FeatureSpec& spec = schema.feature(f);
    if (!spec.is_categorical()) {
      columns_.push_back({f, -1, spec.name});
      continue;
    }
    for (std::size_t l = 1; l < spec.levels.size(); ++l) {
      columns_.push_back({f, static_cast<int>(l), spec.name + "=" + spec.levels[l]});
    }
  }
  Finish();
}

ColumnMap ColumnMap::Numeric(const std::vector<std::string>& names) {
  ColumnMap map;
  for (std::size_t i = 0; i < names.size(); ++i) {
    map.columns_.push_back({i, -1, names[i]});
  }
  map.Finish();
  return map;
}

void ColumnMap::Finish() {
  blocks_.clear();
  owner_.clear();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const EncodedColumn& col = columns_[c];
    if (blocks_.empty() || blocks_.back().feature != col.feature) {
      std::string name = col.name.substr(0, col.name.find('='));
      blocks_.push_back({col.feature, std::move(name), c, 0});
    }
    ++blocks_.back().count;
    owner_.push_back(blocks_.size() - 1);
  }
}

std::vector<std::string> ColumnMap::feature_names() const {
  std::vector<std::string> out;
  out.reserve(blocks_.size());
  for (const FeatureBlock& b : blocks_) out.push_back(b.name);
  return out;
}

bool ColumnMap::operator==(const ColumnMap& other) const {
  if (columns_.size() != other.columns_.size()) return false;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].feature != other.columns_[i].feature ||
        columns_[i].level != other.columns_[i].level ||
        columns_[i].name != other.columns_[i].name) {
      return false;
    }
  }
  return true;
}

ColumnMap ModelColumnMap(const Schema& schema, bool include_sensitive) {
  return ColumnMap(schema, schema.ModelFeatures(include_sensitive));
}

void EncodeRow(const LoanRecord& record, const ColumnMap& map,
               const Schema& schema, std::span<double> out) {
  if (out.size() != map.size()) throw ShapeError("encode: output row width mismatch");
  for (const FeatureBlock& block : map.blocks()) {
    const FeatureSpec& spec = schema.feature(block.feature);
    const double v = record[block.feature];
    if (!spec.is_categorical()) {
      out[block.first] = v;
      continue;
    }
    const int level = static_cast<int>(v);
    if (level < 0 || static_cast<std::size_t>(level) >= spec.levels.size() ||
        static_cast<double>(level) != v) {
      throw EncodingError("feature '" + spec.name + "' has unknown level " +
                          std::to_string(v));
    }
    for (std::size_t k = 0; k < block.count; ++k) {
      out[block.first + k] =
          map.columns()[block.first + k].level == level ? 1.0 : 0.0;
    }
  }
}

EncodedMatrix Encode(std::span<const LoanRecord> records, const Schema& schema,
                     const ColumnMap& map) {
  EncodedMatrix m;
  m.rows = records.size();
  m.cols = map.size();
  m.columns = map;
  m.data.assign(m.rows * m.cols, 0.0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EncodeRow(records[i], map, schema, m.row(i));
  }
  return m;
}

EncodedMatrix Encode(std::span<const LoanRecord> records, const Schema& schema,
                     bool include_sensitive) {
  return Encode(records, schema, ModelColumnMap(schema, include_sensitive));
}

}  // namespace driftscope
