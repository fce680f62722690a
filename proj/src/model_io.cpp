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

#include "driftscope/model_io.hpp"

#include "driftscope/errors.hpp"
#include "driftscope/schema.hpp"

namespace driftscope {

nlohmann::ordered_json GbdtToJson(const GbdtModel& model) {
  nlohmann::ordered_json doc;
  doc["kind"] = "gbdt";
  doc["base_score"] = model.base_score();
  doc["learning_rate"] = model.learning_rate();
  nlohmann::ordered_json columns = nlohmann::ordered_json::array();
  for (const EncodedColumn& c : model.columns().columns()) {
    nlohmann::ordered_json col;
    col["name"] = c.name;
    col["feature"] = c.feature;
    col["level"] = c.level;
    columns.push_back(std::move(col));
  }
  doc["columns"] = std::move(columns);
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const Tree& t : model.trees()) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const TreeNode& n : t.nodes) {
      nlohmann::ordered_json node;
      if (n.is_leaf()) {
        node["leaf"] = n.value;
      } else {
        node["column"] = n.column;
        node["threshold"] = n.threshold;
        node["left"] = n.left;
        node["right"] = n.right;
      }
      nodes.push_back(std::move(node));
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc;
}

GbdtModel GbdtFromJson(const nlohmann::json& doc, const std::string& origin) {
  try {
    if (doc.at("kind").get<std::string>() != "gbdt") {
      throw ParseError(origin + ": not a gbdt model");
    }
    const Schema& schema = Schema::Lending();
    std::vector<std::size_t> features;
    for (const auto& col : doc.at("columns")) {
      const auto f = col.at("feature").get<std::size_t>();
      if (features.empty() || features.back() != f) features.push_back(f);
    }
    ColumnMap columns(schema, features);
    if (columns.size() != doc.at("columns").size()) {
      throw ParseError(origin + ": column map does not match the schema");
    }
    std::vector<Tree> trees;
    for (const auto& jt : doc.at("trees")) {
      Tree t;
      for (const auto& jn : jt) {
        TreeNode n;
        if (jn.contains("leaf")) {
          n.value = jn.at("leaf").get<double>();
        } else {
          n.column = jn.at("column").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        t.nodes.push_back(n);
      }
      const auto size = static_cast<int>(t.nodes.size());
      for (const TreeNode& n : t.nodes) {
        if (n.is_leaf()) continue;
        if (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size ||
            n.column >= static_cast<int>(columns.size())) {
          throw ParseError(origin + ": tree node out of range");
        }
      }
      if (t.nodes.empty()) throw ParseError(origin + ": empty tree");
      trees.push_back(std::move(t));
    }
    return GbdtModel(doc.at("base_score").get<double>(),
                     doc.at("learning_rate").get<double>(), std::move(trees),
                     std::move(columns));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

}  // namespace driftscope
