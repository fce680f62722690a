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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "driftscope/csv.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/pipeline.hpp"
#include "test_support.hpp"

namespace driftscope {
namespace {

namespace fs = std::filesystem;

RunConfig SmallConfig(const fs::path& dir) {
  RunConfig c;
  c.generator.rows_per_year = 300;
  c.models.params.gbdt.n_trees = 40;
  c.models.params.forest.n_trees = 20;
  c.explanation.instances = 20;
  c.explanation.background = 32;
  c.explanation.n_permutations = 50;
  c.method_b.window = 200;
  c.fairness.harmful.resamples = 50;
  c.fairness.bootstrap_resamples = 50;
  c.robustness.instances = 20;
  c.robustness.sizes = {16, 32, 64};
  c.stats.resamples = 200;
  c.out_dir = dir.string();
  return c;
}

RunManifest RunAll(const RunConfig& config, std::vector<std::string>* notices = nullptr) {
  Pipeline p(config, [notices](const std::string& m) {
    if (notices) notices->push_back(m);
  });
  return p.Run(RunRequest{AllStages(), kMethods});
}

// One full small run shared by the read-only tests.
const fs::path& SharedRun() {
  static const fs::path dir = [] {
    const fs::path d = testing::ScratchDir("pipeline_shared");
    RunAll(SmallConfig(d));
    return d;
  }();
  return dir;
}

class ScopedThreads {
 public:
  explicit ScopedThreads(const char* value) {
    if (const char* old = std::getenv("DRIFTSCOPE_THREADS")) old_ = old;
    ::setenv("DRIFTSCOPE_THREADS", value, 1);
  }
  ~ScopedThreads() {
    if (old_.empty()) {
      ::unsetenv("DRIFTSCOPE_THREADS");
    } else {
      ::setenv("DRIFTSCOPE_THREADS", old_.c_str(), 1);
    }
  }

 private:
  std::string old_;
};

TEST(Stages, NamesRoundTrip) {
  for (Stage s : AllStages()) EXPECT_EQ(ParseStage(StageName(s)), s);
  EXPECT_THROW(ParseStage("bogus"), ConfigError);
  EXPECT_EQ(StagesFrom(Stage::kStats).size(), 2u);
  EXPECT_EQ(StagesFrom(Stage::kGenerate).size(), AllStages().size());
}

TEST(Pipeline, FullRunWritesEveryArtifact) {
  const fs::path& dir = SharedRun();
  for (const char* f :
       {"panel.csv", "schema.json", "drift_report.csv", "drift_report.json", "metrics.csv",
        "model_2016.json", "model_2024.json", "importance_baseline.csv", "importance_A.csv",
        "importance_B.csv", "importance_C.csv", "attributions_baseline_2020.csv",
        "stability.csv", "fairness.csv", "recalibration.csv", "harmful_features.csv",
        "proxy.csv", "counterfactuals.csv", "background_sensitivity.csv", "significance.csv",
        "temporal_correlation.csv", "stability_baseline.svg", "manifest.json", "config.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir / ".driftscope.lock"));
  const RunManifest m = RunManifest::FromJson(
      nlohmann::json::parse(ReadFile(dir / "manifest.json")), "manifest.json");
  EXPECT_EQ(m.status, "complete");
  EXPECT_EQ(m.stages.size(), AllStages().size());
  for (const auto& [file, digest] : m.Digests()) {
    EXPECT_EQ(Sha256Hex(ReadFile(dir / file)), digest) << file;
  }
  const CsvTable stab = ReadCsv(dir / "stability.csv");
  EXPECT_EQ(stab.rows.size(), 4u * 8u);
}

TEST(Pipeline, StageNeedsUpstreamArtifacts) {
  const fs::path dir = testing::ScratchDir("pipeline_isolated");
  Pipeline p(SmallConfig(dir));
  try {
    p.Run(RunRequest{{Stage::kStability}, kMethods});
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("stability"), std::string::npos);
  }
  const RunManifest m = RunManifest::FromJson(
      nlohmann::json::parse(ReadFile(dir / "manifest.json")), "manifest.json");
  EXPECT_EQ(m.status, "failed");
  EXPECT_EQ(m.failed_stage, "stability");
  EXPECT_FALSE(fs::exists(dir / ".driftscope.lock"));
}

TEST(Pipeline, ResumeFromLaterStageKeepsUpstreamBytes) {
  const fs::path dir = testing::ScratchDir("pipeline_resume");
  const RunConfig config = SmallConfig(dir);
  const RunManifest full = RunAll(config);
  const std::string panel_before = ReadFile(dir / "panel.csv");
  Pipeline p(config);
  const RunManifest resumed = p.Run(RunRequest{StagesFrom(Stage::kStability), kMethods});
  EXPECT_EQ(ReadFile(dir / "panel.csv"), panel_before);
  EXPECT_EQ(resumed.Digests(), full.Digests());
  for (const StageRecord& s : resumed.stages) {
    EXPECT_EQ(s.ran, ParseStage(s.name) >= Stage::kStability) << s.name;
  }

  RunConfig changed = config;
  changed.explanation.seed += 1;
  Pipeline q(changed);
  EXPECT_THROW(q.Run(RunRequest{StagesFrom(Stage::kStability), kMethods}), ConfigError);
  // Starting again from generate is always allowed.
  EXPECT_NO_THROW(q.Run(RunRequest{{Stage::kGenerate}, kMethods}));
}

TEST(Pipeline, LockAndDirectoryErrors) {
  const fs::path dir = testing::ScratchDir("pipeline_locked");
  std::ofstream(dir / ".driftscope.lock") << "1\n";
  Pipeline locked(SmallConfig(dir));
  EXPECT_THROW(locked.Run(RunRequest{{Stage::kGenerate}, kMethods}), StageError);
  EXPECT_TRUE(fs::exists(dir / ".driftscope.lock"));

  const fs::path file = testing::ScratchDir("pipeline_file") / "plain";
  std::ofstream(file) << "x";
  Pipeline under_file(SmallConfig(file / "out"));
  EXPECT_THROW(under_file.Run(RunRequest{{Stage::kGenerate}, kMethods}), ConfigError);
  Pipeline is_file(SmallConfig(file));
  EXPECT_THROW(is_file.Run(RunRequest{{Stage::kGenerate}, kMethods}), ConfigError);

  Pipeline bad_method(SmallConfig(dir));
  EXPECT_THROW(bad_method.Run(RunRequest{{Stage::kExplain}, {"D"}}), ConfigError);
}

TEST(Pipeline, OutputsIndependentOfThreadCount) {
  const fs::path d1 = testing::ScratchDir("pipeline_t1");
  const fs::path d4 = testing::ScratchDir("pipeline_t4");
  RunManifest m1, m4;
  {
    ScopedThreads t("1");
    m1 = RunAll(SmallConfig(d1));
  }
  {
    ScopedThreads t("4");
    m4 = RunAll(SmallConfig(d4));
  }
  EXPECT_EQ(m1.Digests(), m4.Digests());
  EXPECT_EQ(m1.ToJson(false).dump(), m4.ToJson(false).dump());
  EXPECT_EQ(m1.Digests(), RunManifest::FromJson(
                              nlohmann::json::parse(ReadFile(SharedRun() / "manifest.json")),
                              "manifest.json")
                              .Digests());
}

TEST(Plots, MissingOrEmptyReportsAreSkippedWithNotice) {
  const fs::path dir = testing::ScratchDir("plots_empty");
  std::ofstream(dir / "stability.csv") << "method,year_from,year_to,cosine,kendall_tau,"
                                          "jaccard_top10\n";
  std::vector<std::string> notices;
  const auto written =
      EmitPlots(dir, [&](const std::string& m) { notices.push_back(m); });
  EXPECT_TRUE(written.empty());
  EXPECT_FALSE(notices.empty());
}

int RunCli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " '" + std::string(DRIFTSCOPE_CLI_PATH) + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = testing::ScratchDir("cli");
  const std::string out = "--out-dir '" + (dir / "out").string() + "'";
  EXPECT_EQ(RunCli("--rows-per-year 300 " + out + " generate"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "panel.csv"));
  EXPECT_EQ(RunCli("--rows-per-year 300 " + out + " stability"), 3);
  EXPECT_EQ(RunCli(out + " frobnicate"), 2);
  EXPECT_EQ(RunCli(out + " generate", "DRIFTSCOPE_THREADS=zero"), 2);
  EXPECT_EQ(RunCli(out + " --from explain generate"), 2);
  std::ofstream(dir / "bad.json") << R"({"unknown_section": {}})";
  EXPECT_EQ(RunCli("--config '" + (dir / "bad.json").string() + "' " + out + " generate"), 2);
  EXPECT_EQ(RunCli("--help"), 0);
}

}  // namespace
}  // namespace driftscope
