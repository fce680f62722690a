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
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftscope/adaptive.hpp"
#include "driftscope/drift.hpp"
#include "driftscope/fairness.hpp"
#include "driftscope/panel.hpp"
#include "driftscope/robustness.hpp"
#include "driftscope/shapley.hpp"
#include "driftscope/training.hpp"

namespace driftscope {

#ifndef DRIFTSCOPE_VERSION
#define DRIFTSCOPE_VERSION "0.0.0"
#endif
inline constexpr const char* kToolkitVersion = DRIFTSCOPE_VERSION;

struct DriftConfig {
  DriftThresholds thresholds;
  int baseline_year = 0;  // 0 = first panel year
};

struct ModelsConfig {
  // The primary model is always GBDT; these kinds are trained alongside it
  // and reported in metrics.csv only.
  std::vector<ModelKind> compare = {ModelKind::kLogistic, ModelKind::kForest};
  ModelParams params;
};

struct ExplanationConfig {
  int instances = 200;
  int background = 64;
  ShapleyMode mode = ShapleyMode::kAuto;
  int n_permutations = 200;
  std::uint64_t seed = 17;
};

enum class DriftWeightSource { kTrainWindow, kBaselineYear };

struct MethodAConfig {
  DriftWeightSource source = DriftWeightSource::kTrainWindow;
};

struct MethodBConfig {
  int window = 512;
};

struct StabilityConfig {
  int k = 10;
};

struct FairnessConfig {
  std::vector<std::string> attributes = {"race", "gender"};
  RecalibrationOptions recalibration;
  int bootstrap_resamples = 200;
  double level = 0.95;
  std::uint64_t seed = 31;
  HarmfulOptions harmful;
  ProxyOptions proxy;
};

struct RobustnessConfig {
  std::vector<PerturbationSpec> perturbations;
  std::vector<std::size_t> sizes = {16, 32, 64, 128, 256};
  int instances = 200;
  std::uint64_t seed = 37;

  RobustnessConfig();
};

struct StatsConfig {
  int resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 29;
};

// Every field has a default, so an empty JSON document is a full run.
struct RunConfig {
  GeneratorConfig generator;
  DriftConfig drift;
  ModelsConfig models;
  ExplanationConfig explanation;
  MethodAConfig method_a;
  MethodBConfig method_b;
  SurrogateParams method_c;
  StabilityConfig stability;
  FairnessConfig fairness;
  RobustnessConfig robustness;
  StatsConfig stats;
  std::string out_dir = "driftscope_out";

  // Throws ConfigError naming the offending field.
  void Validate() const;

  // Effective configuration with every default written out. The output
  // directory is a location rather than content, so it can be left out.
  nlohmann::ordered_json ToJson(bool include_out_dir = true) const;
  // Unknown keys and wrongly typed values throw ConfigError.
  static RunConfig FromJson(const nlohmann::json& doc);

  // SHA-256 (hex) of the compact effective JSON, excluding out_dir.
  std::string Hash() const;
};

// Reads a JSON config file; parse failures throw ConfigError.
RunConfig LoadRunConfig(const std::filesystem::path& path);

std::string ShapleyModeName(ShapleyMode mode);
std::string DriftWeightSourceName(DriftWeightSource source);

// Lower-case hex SHA-256.
std::string Sha256Hex(std::string_view data);

}  // namespace driftscope
