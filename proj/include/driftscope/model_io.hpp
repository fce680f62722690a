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

#include <string>

#include "driftscope/gbdt.hpp"
#include <nlohmann/json.hpp>

namespace driftscope {

// model_<year>.json layout, fields in a fixed order:
//   {"kind", "base_score", "learning_rate", "columns": [...],
//    "trees": [[node, ...], ...]}
// Internal node: {"column", "threshold", "left", "right"}; leaf: {"leaf"}.
nlohmann::ordered_json GbdtToJson(const GbdtModel& model);
// Throws ParseError on malformed documents.
GbdtModel GbdtFromJson(const nlohmann::json& doc, const std::string& origin);

}  // namespace driftscope
