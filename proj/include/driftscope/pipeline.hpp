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

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftscope/config.hpp"
#include "driftscope/csv.hpp"

namespace driftscope {

enum class Stage {
  kGenerate,
  kDrift,
  kTrain,
  kExplain,
  kStability,
  kFairness,
  kRobustness,
  kStats,
  kPlots,
};

const std::vector<Stage>& AllStages();
std::string StageName(Stage stage);
// Throws ConfigError for unknown names.
Stage ParseStage(const std::string& name);
// `first` and every later stage.
std::vector<Stage> StagesFrom(Stage first);

// Explanation methods in output order.
inline const std::vector<std::string> kMethods = {"baseline", "A", "B", "C"};

struct OutputDigest {
  std::string file;
  std::string sha256;
};

struct StageRecord {
  std::string name;
  std::vector<OutputDigest> outputs;
  double wall_seconds = 0.0;
  bool ran = false;  // false when carried over from an earlier invocation
};

struct RunManifest {
  std::string config_hash;
  std::string version = kToolkitVersion;
  OutputDigest config;
  std::vector<StageRecord> stages;
  std::string status = "complete";
  std::string failed_stage;
  std::string error;

  // `with_timing = false` gives the deterministic (golden) form.
  nlohmann::ordered_json ToJson(bool with_timing = true) const;
  static RunManifest FromJson(const nlohmann::json& doc, const std::string& origin);
  // file -> digest over every stage output.
  std::map<std::string, std::string> Digests() const;
};

using NoticeSink = std::function<void(const std::string&)>;

struct RunRequest {
  std::vector<Stage> stages;
  // Methods computed by the explain stage ("baseline", "A", "B", "C").
  std::vector<std::string> methods = kMethods;
};

// Owns one output directory for the duration of a run (lock file).
// Stage failures are rethrown as StageError after the partial manifest is
// written; configuration and directory problems throw ConfigError before
// anything is written.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config, NoticeSink notice = {});

  RunManifest Run(const RunRequest& request);

  const RunConfig& config() const { return config_; }

 private:
  RunConfig config_;
  NoticeSink notice_;
};

// Chart builders shared by the plots stage and its golden tests. Each takes
// a parsed report and returns an SVG document.
std::string RenderStabilityPlot(const CsvTable& stability, const std::string& method);

// Writes every plot whose input report exists and is non-empty; returns the
// file names written. Missing or empty reports produce a notice.
std::vector<std::string> EmitPlots(const std::filesystem::path& dir,
                                   const NoticeSink& notice);

}  // namespace driftscope
