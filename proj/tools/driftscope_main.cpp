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
#include <cctype>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "driftscope/config.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

void CheckThreadEnv() {
  const char* env = std::getenv("DRIFTSCOPE_THREADS");
  if (env == nullptr) return;
  const std::string text(env);
  const bool digits = !text.empty() && text.find_first_not_of("0123456789") == std::string::npos;
  if (!digits || std::stol(text) < 1) {
    throw driftscope::ConfigError("DRIFTSCOPE_THREADS must be a positive integer, got '" +
                                  text + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace driftscope;

  CLI::App app{"DriftScope: drift-aware explanation, stability and fairness audits"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string from;
  int rows_per_year = 0;
  bool include_sensitive = false;
  auto* seed_opt = app.add_option("--seed", seed, "Generator seed");
  auto* rows_opt = app.add_option("--rows-per-year", rows_per_year, "Rows per panel year");
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_option("--from", from, "With run: start at this stage");
  app.add_flag("--include-sensitive", include_sensitive,
               "Feed race and gender to the models");

  std::string method = "all";
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"generate", "Generate the seeded lending panel"},
      {"drift", "Drift report against the baseline year"},
      {"train", "Expanding-window models and metrics"},
      {"explain", "Shapley explanations per test year"},
      {"stability", "Year-over-year explanation stability"},
      {"fairness", "Group fairness, recalibration, harmful features, proxies"},
      {"robustness", "Counterfactual perturbations and background sensitivity"},
      {"stats", "Paired bootstrap intervals and significance tests"},
      {"plots", "SVG charts from the reports"},
      {"run", "Every stage in order"},
  };
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    if (std::string(c.name) == "explain") {
      sub->add_option("--method", method, "baseline, a, b, c or all")
          ->check(CLI::IsMember({"baseline", "a", "b", "c", "all"}, CLI::ignore_case));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    CheckThreadEnv();
    RunConfig config = config_path.empty() ? RunConfig{} : LoadRunConfig(config_path);
    if (*seed_opt) config.generator.seed = seed;
    if (*rows_opt) config.generator.rows_per_year = rows_per_year;
    if (include_sensitive) config.models.params.include_sensitive = true;
    if (!out_dir.empty()) config.out_dir = out_dir;

    const std::string command = app.get_subcommands().front()->get_name();
    RunRequest request;
    if (command == "run") {
      request.stages = from.empty() ? AllStages() : StagesFrom(ParseStage(from));
    } else {
      if (!from.empty()) throw ConfigError("--from is only valid with the run command");
      request.stages = {ParseStage(command)};
    }
    if (command == "explain" && method != "all") {
      request.methods = {method == "baseline" ? std::string("baseline")
                                              : std::string(1, static_cast<char>(
                                                                   std::toupper(method[0])))};
    }

    Pipeline pipeline(config, [](const std::string& msg) {
      std::cerr << "driftscope: " << msg << "\n";
    });
    const RunManifest manifest = pipeline.Run(request);
    std::size_t files = 0;
    for (const auto& s : manifest.stages) files += s.outputs.size();
    std::cout << "driftscope: " << request.stages.size() << " stage(s) complete, " << files
              << " artifact(s) in " << config.out_dir << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "driftscope: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "driftscope: " << e.what() << "\n";
    return kExitStage;
  }
}
