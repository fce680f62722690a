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
#include "driftscope/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <optional>
#include <set>
#include <utility>

#include "driftscope/adaptive.hpp"
#include "driftscope/drift.hpp"
#include "driftscope/encoding.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/fairness.hpp"
#include "driftscope/inference.hpp"
#include "driftscope/metrics.hpp"
#include "driftscope/model_io.hpp"
#include "driftscope/panel.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/rng.hpp"
#include "driftscope/robustness.hpp"
#include "driftscope/shapley.hpp"
#include "driftscope/special.hpp"
#include "driftscope/stability.hpp"
#include "driftscope/svg.hpp"
#include "driftscope/training.hpp"

namespace driftscope {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kConfigFile = "config.json";
constexpr const char* kLockFile = ".driftscope.lock";
constexpr const char* kNa = "NA";

// Stream tags for seeded draws that share a user seed.
constexpr std::uint64_t kInstanceStream = 0x31;
constexpr std::uint64_t kPermutationStream = 0x32;
constexpr std::uint64_t kSensitivityStream = 0x33;
constexpr std::uint64_t kFairnessStream = 0x34;

std::string Num(double v) { return FormatDouble(v); }
std::string Num(const std::optional<double>& v) { return v ? FormatDouble(*v) : kNa; }
std::string Int(long long v) { return std::to_string(v); }

std::string FileDigest(const fs::path& path) { return Sha256Hex(ReadFile(path)); }

// Holds the output directory for one run.
class DirectoryLock {
 public:
  explicit DirectoryLock(fs::path path) : path_(std::move(path)) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST) {
        throw StageError("output directory is in use by another run (lock file " +
                         path_.string() + "); remove it if no run is active");
      }
      throw ConfigError("out_dir: cannot create lock file " + path_.string() + ": " +
                        std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    const ssize_t written = ::write(fd, pid.data(), pid.size());
    (void)written;
    ::close(fd);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

void PrepareDirectory(const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) {
      throw ConfigError("out_dir: " + dir.string() + " exists and is not a directory");
    }
  } else {
    fs::create_directories(dir, ec);
    if (ec) {
      throw ConfigError("out_dir: cannot create " + dir.string() + ": " + ec.message());
    }
  }
  if (::access(dir.c_str(), W_OK | X_OK) != 0) {
    throw ConfigError("out_dir: " + dir.string() + " is not writable");
  }
}

// Per-stage I/O helper: every artifact goes through Write so the stage's
// output list is complete.
class StageContext {
 public:
  StageContext(const RunConfig& config, fs::path dir, const NoticeSink& notice)
      : config_(config), dir_(std::move(dir)), notice_(notice) {}

  const RunConfig& config() const { return config_; }
  const fs::path& dir() const { return dir_; }
  fs::path Path(const std::string& name) const { return dir_ / name; }
  bool Exists(const std::string& name) const { return fs::exists(Path(name)); }
  void Notice(const std::string& message) const {
    if (notice_) notice_(message);
  }

  void Require(const std::string& name) const {
    if (!Exists(name)) {
      throw StageError("missing input artifact " + name +
                       " (run the stage that produces it first)");
    }
  }
  void Write(const std::string& name, std::string_view text) {
    WriteFile(Path(name), text);
    Record(name);
  }
  // Registers a file written by other code.
  void Record(const std::string& name) {
    if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) {
      outputs_.push_back(name);
    }
  }
  void WriteJson(const std::string& name, const ordered_json& doc) {
    Write(name, doc.dump(2) + "\n");
  }
  CsvTable Csv(const std::string& name) const {
    Require(name);
    return ReadCsv(Path(name));
  }
  json Json(const std::string& name) const {
    Require(name);
    try {
      return json::parse(ReadFile(Path(name)));
    } catch (const json::parse_error& e) {
      throw ParseError(name + ": " + e.what());
    }
  }
  const std::vector<std::string>& outputs() const { return outputs_; }

 private:
  const RunConfig& config_;
  fs::path dir_;
  const NoticeSink& notice_;
  std::vector<std::string> outputs_;
};

// ---------------------------------------------------------------- loading

Panel LoadPanel(const StageContext& ctx) {
  const json schema = ctx.Json("schema.json");
  if (schema != json::parse(Schema::Lending().ToJson().dump())) {
    throw ParseError("schema.json: does not match the lending schema");
  }
  ctx.Require("panel.csv");
  return PanelFromCsv(ReadFile(ctx.Path("panel.csv")), "panel.csv");
}

std::vector<int> TestYears(const Panel& panel) {
  std::vector<int> years = panel.years();
  if (years.size() < 2) throw InputError("panel needs at least two years");
  years.erase(years.begin());
  return years;
}

std::string ModelFile(int year) { return "model_" + std::to_string(year) + ".json"; }

std::shared_ptr<const GbdtModel> LoadModel(const StageContext& ctx, int year) {
  const std::string name = ModelFile(year);
  return std::make_shared<GbdtModel>(GbdtFromJson(ctx.Json(name), name));
}

std::string AttributionFile(const std::string& method, int year) {
  return "attributions_" + method + "_" + std::to_string(year) + ".csv";
}

std::string ImportanceFile(const std::string& method) {
  return "importance_" + method + ".csv";
}

std::string AttributionCsv(const AttributionMatrix& attrs) {
  std::vector<std::string> header = {"instance_id", "base_value"};
  header.insert(header.end(), attrs.features.begin(), attrs.features.end());
  CsvWriter w(header);
  for (std::size_t i = 0; i < attrs.rows(); ++i) {
    std::vector<std::string> row = {Int(attrs.instance_ids[i]), Num(attrs.base_value)};
    for (std::size_t j = 0; j < attrs.cols(); ++j) row.push_back(Num(attrs.at(i, j)));
    w.Row(std::move(row));
  }
  return w.str();
}

AttributionMatrix ReadAttributions(const StageContext& ctx, const std::string& method,
                                   int year) {
  const CsvTable t = ctx.Csv(AttributionFile(method, year));
  if (t.header.size() < 3 || t.header[0] != "instance_id" || t.header[1] != "base_value") {
    throw ParseError(t.path + ": unexpected header");
  }
  AttributionMatrix a;
  a.year = year;
  a.method = method;
  a.features.assign(t.header.begin() + 2, t.header.end());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    a.instance_ids.push_back(static_cast<int>(t.Integer(r, 0)));
    a.base_value = t.Number(r, 1);
    for (std::size_t c = 2; c < t.header.size(); ++c) a.phi.push_back(t.Number(r, c));
  }
  return a;
}

std::string ImportanceCsv(const std::vector<ImportanceVector>& vectors) {
  std::vector<std::string> header = {"year"};
  header.insert(header.end(), vectors.front().features.begin(),
                vectors.front().features.end());
  CsvWriter w(header);
  for (const auto& v : vectors) {
    std::vector<std::string> row = {Int(v.year)};
    for (double x : v.values) row.push_back(Num(x));
    w.Row(std::move(row));
  }
  return w.str();
}

std::vector<ImportanceVector> ReadImportance(const StageContext& ctx,
                                             const std::string& method) {
  const CsvTable t = ctx.Csv(ImportanceFile(method));
  if (t.header.size() < 2 || t.header[0] != "year") {
    throw ParseError(t.path + ": unexpected header");
  }
  std::vector<ImportanceVector> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ImportanceVector v;
    v.year = static_cast<int>(t.Integer(r, 0));
    v.method = method;
    v.features.assign(t.header.begin() + 1, t.header.end());
    for (std::size_t c = 1; c < t.header.size(); ++c) v.values.push_back(t.Number(r, c));
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<LoanRecord> Pick(const std::vector<LoanRecord>& records,
                             const std::vector<std::size_t>& indices) {
  std::vector<LoanRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(records.at(i));
  return out;
}

double Quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return SortedQuantile(values, q);
}

// ---------------------------------------------------------------- stages

void StageGenerate(StageContext& ctx) {
  const Panel panel = GeneratePanel(ctx.config().generator);
  ctx.Write("panel.csv", PanelToCsv(panel));
  ctx.WriteJson("schema.json", panel.schema().ToJson());

  const Schema& schema = panel.schema();
  const std::size_t employment = schema.IndexOf("employment_status");
  const std::size_t income = schema.IndexOf("annual_income");
  const std::size_t score = schema.IndexOf("credit_score");
  CsvWriter w({"year", "rows", "default_rate", "unemployed_share", "mean_income",
               "mean_credit_score"});
  for (const YearSlice& s : panel.slices()) {
    double unemployed = 0, inc = 0, cs = 0;
    for (const LoanRecord& r : s.records) {
      unemployed += r.level(employment) == kUnemployed ? 1.0 : 0.0;
      inc += r[income];
      cs += r[score];
    }
    const double n = static_cast<double>(s.records.size());
    w.Row({Int(s.year), Int(static_cast<long long>(s.records.size())), Num(s.default_rate()),
           Num(unemployed / n), Num(inc / n), Num(cs / n)});
  }
  ctx.Write("panel_summary.csv", w.str());
}

void StageDrift(StageContext& ctx) {
  const Panel panel = LoadPanel(ctx);
  const auto& cfg = ctx.config().drift;
  const int baseline = cfg.baseline_year != 0 ? cfg.baseline_year : panel.years().front();
  const auto& base = panel.Slice(baseline).records;

  CsvWriter w({"baseline_year", "target_year", "feature", "kind", "psi", "ks_stat", "ks_p",
               "js", "chi2", "chi2_p", "drift"});
  ordered_json doc;
  doc["baseline_year"] = baseline;
  doc["psi_threshold"] = cfg.thresholds.psi;
  doc["chi2_alpha"] = cfg.thresholds.chi2_alpha;
  doc["bins"] = cfg.thresholds.bins;
  doc["reports"] = ordered_json::array();
  for (int year : panel.years()) {
    if (year == baseline) continue;
    const DriftReport report = MakeDriftReport(base, panel.Slice(year).records, panel.schema(),
                                               cfg.thresholds, baseline, year);
    ordered_json rep;
    rep["target_year"] = year;
    rep["label_rate_delta"] = report.label_rate_delta;
    rep["features"] = ordered_json::array();
    for (const FeatureDrift& f : report.features) {
      const bool numeric = f.kind == FeatureKind::kNumeric;
      w.Row({Int(baseline), Int(year), f.feature, numeric ? "numeric" : "categorical",
             numeric ? Num(f.psi) : kNa, numeric ? Num(f.ks_stat) : kNa,
             numeric ? Num(f.ks_p) : kNa, numeric ? kNa : Num(f.js),
             numeric ? kNa : Num(f.chi2), numeric ? kNa : Num(f.chi2_p),
             f.drift ? "1" : "0"});
      ordered_json fj;
      fj["feature"] = f.feature;
      fj["kind"] = numeric ? "numeric" : "categorical";
      if (numeric) {
        fj["psi"] = f.psi;
        fj["ks_stat"] = f.ks_stat;
        fj["ks_p"] = f.ks_p;
      } else {
        fj["js"] = f.js;
        fj["chi2"] = f.chi2;
        fj["chi2_p"] = f.chi2_p;
        fj["chi2_dof"] = f.chi2_dof;
      }
      fj["drift"] = f.drift;
      rep["features"].push_back(std::move(fj));
    }
    doc["reports"].push_back(std::move(rep));
  }
  ctx.Write("drift_report.csv", w.str());
  ctx.WriteJson("drift_report.json", doc);
}

void StageTrain(StageContext& ctx) {
  const Panel panel = LoadPanel(ctx);
  const auto& models = ctx.config().models;
  CsvWriter w({"model", "test_year", "train_rows", "auc", "f1", "precision", "recall",
               "threshold"});
  auto evaluate = [&](ModelKind kind, bool save) {
    for (const WindowModel& wm : ExpandingWindowTrain(panel, kind, models.params)) {
      const auto& test = panel.Slice(wm.test_year).records;
      const EncodedMatrix x = Encode(test, panel.schema(), wm.model->columns());
      const std::vector<double> scores = wm.model->PredictProba(x);
      const ModelMetrics m = ClassificationMetrics(scores, Labels(test), 0.5);
      w.Row({ModelKindName(kind), Int(wm.test_year),
             Int(static_cast<long long>(wm.train_keys.size())), Num(m.auc), Num(m.f1),
             Num(m.precision), Num(m.recall), Num(m.threshold)});
      if (save) {
        const auto& gbdt = dynamic_cast<const GbdtModel&>(*wm.model);
        ctx.Write(ModelFile(wm.test_year), GbdtToJson(gbdt).dump() + "\n");
      }
    }
  };
  evaluate(ModelKind::kGbdt, true);
  for (ModelKind kind : models.compare) evaluate(kind, false);
  ctx.Write("metrics.csv", w.str());
}

bool Wants(const std::vector<std::string>& methods, const std::string& m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

void StageExplain(StageContext& ctx, const std::vector<std::string>& methods) {
  const Panel panel = LoadPanel(ctx);
  const Schema& schema = panel.schema();
  const RunConfig& cfg = ctx.config();
  const auto& ex = cfg.explanation;
  const bool want_base = Wants(methods, "baseline");
  const bool want_a = Wants(methods, "A");
  const bool want_b = Wants(methods, "B");
  const bool want_c = Wants(methods, "C");
  const bool need_base = want_base || want_a || want_c;

  std::map<std::string, std::vector<ImportanceVector>> importance;
  CsvWriter weights_csv({"year", "feature", "drift_score", "weight"});
  CsvWriter c_csv({"year", "surrogate_fitted", "cosine", "triggered"});
  RidgeSurrogate surrogate(cfg.method_c);
  ordered_json report;
  report["instances"] = ex.instances;
  report["background"] = ex.background;
  report["mode"] = ShapleyModeName(ex.mode);
  report["method_b_window"] = cfg.method_b.window;
  report["years"] = ordered_json::array();

  for (int year : TestYears(panel)) {
    const auto model = LoadModel(ctx, year);
    const auto& slice = panel.Slice(year).records;
    const auto instances =
        Pick(slice, SampleIndices(slice.size(), static_cast<std::size_t>(ex.instances),
                                  StreamKey({ex.seed, static_cast<std::uint64_t>(year),
                                             kInstanceStream})));
    ExplainOptions options;
    options.mode = ex.mode;
    options.n_permutations = ex.n_permutations;
    options.seed = StreamKey({ex.seed, static_cast<std::uint64_t>(year), kPermutationStream});
    ordered_json yj;
    yj["year"] = year;

    AttributionMatrix base;
    if (need_base) {
      const BackgroundSet bg =
          StaticBackground(panel, year, static_cast<std::size_t>(ex.background), ex.seed);
      base = Explain(*model, instances, bg, schema, options);
      base.method = "baseline";
      yj["baseline_background"] = bg.size();
      if (want_base) {
        ctx.Write(AttributionFile("baseline", year), AttributionCsv(base));
        importance["baseline"].push_back(MeanAbsImportance(base));
      }
    }
    if (want_a) {
      const std::vector<LoanRecord> reference =
          cfg.method_a.source == DriftWeightSource::kTrainWindow
              ? panel.RecordsBefore(year)
              : panel.Slice(panel.years().front()).records;
      const DriftWeights dw =
          ComputeDriftWeights(reference, slice, schema, model->columns(), cfg.drift.thresholds);
      for (std::size_t j = 0; j < dw.features.size(); ++j) {
        weights_csv.Row({Int(year), dw.features[j], Num(dw.scores[j]), Num(dw.weights[j])});
      }
      ImportanceVector a = MethodAAdjust(MeanAbsImportance(base), dw);
      importance["A"].push_back(std::move(a));
    }
    if (want_b) {
      const BackgroundSet bg = SlidingWindowBackground(
          panel, year, static_cast<std::size_t>(cfg.method_b.window), ex.seed);
      AttributionMatrix b = Explain(*model, instances, bg, schema, options);
      b.method = "B";
      yj["b_background"] = bg.size();
      ctx.Write(AttributionFile("B", year), AttributionCsv(b));
      importance["B"].push_back(MeanAbsImportance(b));
    }
    if (want_c) {
      const EncodedMatrix rows = Encode(instances, schema, model->columns());
      AttributionMatrix c;
      if (surrogate.fitted()) {
        Recalibration rec = MethodCRecalibrate(surrogate, base, rows);
        c = std::move(rec.attrs);
        c_csv.Row({Int(year), "1", Num(rec.cosine), rec.triggered ? "1" : "0"});
        yj["c_cosine"] = rec.cosine;
        yj["c_triggered"] = rec.triggered;
      } else {
        c = base;
        c_csv.Row({Int(year), "0", kNa, "0"});
        yj["c_triggered"] = false;
      }
      c.method = "C";
      ctx.Write(AttributionFile("C", year), AttributionCsv(c));
      importance["C"].push_back(MeanAbsImportance(c));
      surrogate.Update(base, rows);
    }
    report["years"].push_back(std::move(yj));
  }

  for (const std::string& m : kMethods) {
    auto it = importance.find(m);
    if (it != importance.end()) ctx.Write(ImportanceFile(m), ImportanceCsv(it->second));
  }
  if (want_a) ctx.Write("method_a_weights.csv", weights_csv.str());
  if (want_c) {
    ctx.Write("method_c_report.csv", c_csv.str());
    ctx.WriteJson("surrogate_state.json", surrogate.ToJson());
  }
  ctx.WriteJson("explain_report.json", report);
}

void StageStability(StageContext& ctx) {
  const auto k = static_cast<std::size_t>(ctx.config().stability.k);
  CsvWriter w({"method", "year_from", "year_to", "cosine", "kendall_tau", "jaccard_top10"});
  ordered_json doc;
  doc["k"] = k;
  doc["methods"] = ordered_json::array();
  std::size_t found = 0;
  for (const std::string& m : kMethods) {
    if (!ctx.Exists(ImportanceFile(m))) continue;
    ++found;
    const StabilitySeries s = ComputeStabilitySeries(ReadImportance(ctx, m), k);
    ordered_json mj;
    mj["method"] = m;
    mj["points"] = ordered_json::array();
    for (const StabilityPoint& p : s.points) {
      w.Row({m, Int(p.year_from), Int(p.year_to), Num(p.cosine), Num(p.kendall_tau),
             Num(p.jaccard)});
      mj["points"].push_back({{"year_from", p.year_from},
                              {"year_to", p.year_to},
                              {"cosine", p.cosine},
                              {"cosine_degenerate", p.cosine_degenerate},
                              {"kendall_tau", p.kendall_tau},
                              {"jaccard", p.jaccard}});
    }
    auto mean = [](const std::vector<double>& v) {
      double sum = 0.0;
      for (double x : v) sum += x;
      return sum / static_cast<double>(v.size());
    };
    mj["mean_cosine"] = mean(s.cosines());
    mj["mean_kendall_tau"] = mean(s.taus());
    mj["mean_jaccard"] = mean(s.jaccards());
    doc["methods"].push_back(std::move(mj));
  }
  if (found == 0) throw StageError("no importance_<method>.csv found (run explain first)");
  ctx.Write("stability.csv", w.str());
  ctx.WriteJson("stability.json", doc);
}

struct FairnessMetrics {
  double dpd = 0.0;
  double eod = 0.0;
  double eodds = 0.0;
};

FairnessMetrics MetricsOf(const GroupOutcomes& o) {
  return {Dpd(o.groups), Eod(o.groups), Eodds(o.groups)};
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Row-resampling percentile intervals for DPD, EOD and equalized odds at
// fixed thresholds.
std::array<Interval, 3> FairnessIntervals(const std::vector<double>& scores,
                                          const std::vector<int>& labels,
                                          const std::vector<std::string>& groups,
                                          const ThresholdMap& thresholds,
                                          std::size_t min_group_size, int resamples,
                                          double level, std::uint64_t key) {
  const std::size_t n = scores.size();
  std::vector<FairnessMetrics> slots(static_cast<std::size_t>(resamples));
  ParallelFor(slots.size(), [&](std::size_t b) {
    CounterRng rng({key, static_cast<std::uint64_t>(b)});
    std::vector<double> s(n);
    std::vector<int> l(n);
    std::vector<std::string> g(n);
    std::set<std::string> present;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = rng.Below(n);
      s[i] = scores[k];
      l[i] = labels[k];
      g[i] = groups[k];
      present.insert(groups[k]);
    }
    ThresholdMap t;
    for (const auto& name : present) t[name] = thresholds.at(name);
    slots[b] = MetricsOf(ComputeGroupOutcomes(s, l, g, t, min_group_size));
  });
  std::array<Interval, 3> out;
  const double lo_q = (1.0 - level) / 2.0, hi_q = (1.0 + level) / 2.0;
  for (int m = 0; m < 3; ++m) {
    std::vector<double> v;
    for (const auto& f : slots) v.push_back(m == 0 ? f.dpd : m == 1 ? f.eod : f.eodds);
    out[m] = {Quantile(v, lo_q), Quantile(v, hi_q)};
  }
  return out;
}

void StageFairness(StageContext& ctx) {
  const Panel panel = LoadPanel(ctx);
  const Schema& schema = panel.schema();
  const RunConfig& cfg = ctx.config();
  const auto& fc = cfg.fairness;
  const auto& rc = fc.recalibration;
  const std::vector<int> years = TestYears(panel);

  CsvWriter fair({"attribute", "year", "method", "metric", "value", "ci_lo", "ci_hi"});
  CsvWriter recal({"attribute", "year", "group", "threshold", "dpd_before", "dpd_after"});
  ordered_json doc;
  doc["aggregation"] = "max pairwise difference over eligible groups";
  doc["positive_prediction"] = "predicted default (score >= threshold)";
  doc["attributes"] = ordered_json::array();

  std::map<int, std::shared_ptr<const GbdtModel>> models;
  for (int year : years) models[year] = LoadModel(ctx, year);

  for (std::size_t ai = 0; ai < fc.attributes.size(); ++ai) {
    const std::string& attr = fc.attributes[ai];
    const std::size_t attr_index = schema.IndexOf(attr);
    ordered_json aj;
    aj["attribute"] = attr;
    aj["years"] = ordered_json::array();
    std::vector<double> before, after;
    for (int year : years) {
      const auto& slice = panel.Slice(year).records;
      const auto& model = *models.at(year);
      const std::vector<double> scores =
          model.PredictProba(Encode(slice, schema, model.columns()));
      const std::vector<int> labels = Labels(slice);
      const std::vector<std::string> groups = GroupLabels(slice, attr_index, schema);

      ThresholdMap uniform;
      for (const auto& g : groups) uniform[g] = rc.base_threshold;
      const RecalibrationResult rec = RecalibrateGroupThresholds(scores, groups, rc);
      const GroupOutcomes u = ComputeGroupOutcomes(scores, labels, groups, uniform,
                                                   rc.min_group_size);
      const GroupOutcomes r = ComputeGroupOutcomes(scores, labels, groups, rec.thresholds,
                                                   rc.min_group_size);
      const FairnessMetrics mu = MetricsOf(u), mr = MetricsOf(r);
      if (mr.dpd > mu.dpd) {
        throw StageError("recalibrated DPD exceeds the uniform-threshold DPD for " + attr +
                         " in " + std::to_string(year));
      }
      // Thresholds never touch the scores, so AUC is computed on the same
      // vector before and after; the comparison guards that invariant.
      const std::vector<double> scores_after = scores;
      const double auc_before = Auc(scores, labels);
      const double auc_after = Auc(scores_after, labels);
      if (std::memcmp(&auc_before, &auc_after, sizeof(double)) != 0) {
        throw StageError("AUC changed under threshold recalibration");
      }

      const std::uint64_t key = StreamKey({fc.seed, kFairnessStream, ai,
                                           static_cast<std::uint64_t>(year)});
      const auto cu = FairnessIntervals(scores, labels, groups, uniform, rc.min_group_size,
                                        fc.bootstrap_resamples, fc.level, StreamKey({key, 0}));
      const auto cr = FairnessIntervals(scores, labels, groups, rec.thresholds,
                                        rc.min_group_size, fc.bootstrap_resamples, fc.level,
                                        StreamKey({key, 1}));
      const char* names[] = {"dpd", "eod", "eodds"};
      const double vu[] = {mu.dpd, mu.eod, mu.eodds};
      const double vr[] = {mr.dpd, mr.eod, mr.eodds};
      for (int m = 0; m < 3; ++m) {
        fair.Row({attr, Int(year), "uniform", names[m], Num(vu[m]), Num(cu[m].lo),
                  Num(cu[m].hi)});
      }
      for (int m = 0; m < 3; ++m) {
        fair.Row({attr, Int(year), "recalibrated", names[m], Num(vr[m]), Num(cr[m].lo),
                  Num(cr[m].hi)});
      }
      fair.Row({attr, Int(year), "uniform", "auc", Num(auc_before), kNa, kNa});
      fair.Row({attr, Int(year), "recalibrated", "auc", Num(auc_after), kNa, kNa});
      for (const auto& [group, threshold] : rec.thresholds) {
        recal.Row({attr, Int(year), group, Num(threshold), Num(rec.dpd_before),
                   Num(rec.dpd_after)});
      }
      before.push_back(mu.dpd);
      after.push_back(mr.dpd);
      for (const auto& g : u.excluded) {
        ctx.Notice("fairness: group " + attr + "=" + g + " in " + std::to_string(year) +
                   " is below the minimum group size and was excluded");
      }

      ordered_json yj;
      yj["year"] = year;
      yj["thresholds"] = rec.thresholds;
      yj["overall_rate_before"] = rec.overall_rate_before;
      yj["overall_rate_after"] = rec.overall_rate_after;
      yj["excluded"] = u.excluded;
      yj["groups"] = ordered_json::array();
      for (std::size_t gi = 0; gi < u.groups.size(); ++gi) {
        const GroupOutcome& gu = u.groups[gi];
        const GroupOutcome& gr = r.groups[gi];
        ordered_json gj;
        gj["group"] = gu.group;
        gj["n"] = gu.n;
        gj["positive_rate_uniform"] = gu.positive_rate;
        gj["positive_rate_recalibrated"] = gr.positive_rate;
        gj["tpr_uniform"] = gu.tpr ? ordered_json(*gu.tpr) : ordered_json();
        gj["fpr_uniform"] = gu.fpr ? ordered_json(*gu.fpr) : ordered_json();
        gj["tpr_recalibrated"] = gr.tpr ? ordered_json(*gr.tpr) : ordered_json();
        gj["fpr_recalibrated"] = gr.fpr ? ordered_json(*gr.fpr) : ordered_json();
        yj["groups"].push_back(std::move(gj));
      }
      aj["years"].push_back(std::move(yj));
    }
    double mean_before = 0.0, mean_after = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
      mean_before += before[i] / static_cast<double>(before.size());
      mean_after += after[i] / static_cast<double>(after.size());
    }
    fair.Row({attr, "pooled", "uniform", "dpd", Num(mean_before), kNa, kNa});
    fair.Row({attr, "pooled", "recalibrated", "dpd", Num(mean_after), kNa, kNa});
    if (before.size() >= 2) {
      const IntervalEstimate red =
          PairedBootstrapCi(before, after, fc.bootstrap_resamples, fc.level,
                            StreamKey({fc.seed, kFairnessStream, ai}));
      fair.Row({attr, "pooled", "reduction", "dpd", Num(red.point), Num(red.ci_lo),
                Num(red.ci_hi)});
      aj["pooled_dpd_reduction"] = {
          {"point", red.point}, {"ci_lo", red.ci_lo}, {"ci_hi", red.ci_hi}, {"level", fc.level}};
    }
    doc["attributes"].push_back(std::move(aj));
  }
  ctx.Write("fairness.csv", fair.str());
  ctx.Write("recalibration.csv", recal.str());

  CsvWriter proxy({"year", "feature", "attribute", "stat", "statistic", "p", "effect",
                   "flagged"});
  for (int year : panel.years()) {
    for (const auto& attr : fc.attributes) {
      for (const ProxyEntry& e :
           ProxyScan(panel.Slice(year).records, schema.IndexOf(attr), schema, fc.proxy)) {
        proxy.Row({Int(year), e.feature, e.attribute, e.stat, Num(e.statistic),
                   Num(e.p_value), Num(e.effect), e.flagged ? "1" : "0"});
      }
    }
  }
  ctx.Write("proxy.csv", proxy.str());

  CsvWriter harmful({"method", "year", "attribute", "feature", "group", "difference", "ci_lo",
                     "ci_hi", "flagged"});
  ordered_json counts = ordered_json::array();
  for (const std::string& method : {std::string("baseline"), std::string("B"),
                                    std::string("C")}) {
    bool complete = true;
    for (int year : years) complete = complete && ctx.Exists(AttributionFile(method, year));
    if (!complete) {
      ctx.Notice("fairness: attributions for method " + method +
                 " are incomplete; harmful-feature scan skipped");
      continue;
    }
    for (std::size_t ai = 0; ai < fc.attributes.size(); ++ai) {
      const std::string& attr = fc.attributes[ai];
      const std::size_t attr_index = schema.IndexOf(attr);
      std::size_t flags = 0;
      for (int year : years) {
        const AttributionMatrix attrs = ReadAttributions(ctx, method, year);
        const auto& slice = panel.Slice(year).records;
        std::vector<LoanRecord> explained;
        for (int id : attrs.instance_ids) explained.push_back(slice.at(static_cast<std::size_t>(id)));
        HarmfulOptions options = fc.harmful;
        options.seed = StreamKey({fc.harmful.seed, ai, static_cast<std::uint64_t>(year)});
        const HarmfulReport rep =
            HarmfulFeatures(attrs, GroupLabels(explained, attr_index, schema), options);
        for (const HarmfulFlag& f : rep.tests) {
          harmful.Row({method, Int(year), attr, f.feature, f.group, Num(f.difference),
                       Num(f.ci_lo), Num(f.ci_hi), f.flagged ? "1" : "0"});
        }
        flags += rep.flag_count();
        for (const auto& g : rep.excluded) {
          ctx.Notice("fairness: harmful scan excluded " + attr + "=" + g + " in " +
                     std::to_string(year) + " (" + method + ", below minimum group size)");
        }
      }
      counts.push_back({{"method", method}, {"attribute", attr}, {"flag_count", flags}});
    }
  }
  doc["harmful_flag_counts"] = counts;
  ctx.Write("harmful_features.csv", harmful.str());
  ctx.WriteJson("fairness.json", doc);
}

void StageRobustness(StageContext& ctx) {
  const Panel panel = LoadPanel(ctx);
  const Schema& schema = panel.schema();
  const RunConfig& cfg = ctx.config();
  const auto& rc = cfg.robustness;
  const int year = panel.years().back();
  const auto model = LoadModel(ctx, year);
  const auto& slice = panel.Slice(year).records;

  CsvWriter cf({"feature", "direction", "mean_delta", "p5", "p95", "n", "skipped"});
  CsvWriter deltas({"feature", "direction", "delta"});
  ordered_json doc;
  doc["year"] = year;
  doc["counterfactuals"] = ordered_json::array();
  for (const PerturbationSpec& spec : rc.perturbations) {
    const CounterfactualResult r = CounterfactualSweep(*model, slice, schema, spec);
    cf.Row({spec.feature, spec.direction(), Num(r.mean_delta), Num(r.p5), Num(r.p95),
            Int(static_cast<long long>(r.deltas.size())),
            Int(static_cast<long long>(r.skipped))});
    for (double d : r.deltas) deltas.Row({spec.feature, spec.direction(), Num(d)});
    doc["counterfactuals"].push_back({{"feature", spec.feature},
                                      {"direction", spec.direction()},
                                      {"mean_delta", r.mean_delta},
                                      {"p5", r.p5},
                                      {"p95", r.p95},
                                      {"n", r.deltas.size()},
                                      {"skipped", r.skipped}});
  }
  ctx.Write("counterfactuals.csv", cf.str());
  ctx.Write("counterfactual_deltas.csv", deltas.str());

  const auto instances = Pick(
      slice, SampleIndices(slice.size(), static_cast<std::size_t>(rc.instances),
                           StreamKey({rc.seed, static_cast<std::uint64_t>(year),
                                      kSensitivityStream})));
  ExplainOptions options;
  options.mode = cfg.explanation.mode;
  options.n_permutations = cfg.explanation.n_permutations;
  options.seed = StreamKey({rc.seed, static_cast<std::uint64_t>(year), kPermutationStream});
  const std::size_t pool = panel.RecordsBefore(year).size();
  if (rc.sizes.back() > pool) {
    throw InputError("robustness.sizes: largest size exceeds the " + std::to_string(pool) +
                     " records before " + std::to_string(year));
  }
  const std::vector<SensitivityCurve> curves = {
      BackgroundSizeSensitivity(
          *model, instances, schema, "baseline", rc.sizes,
          [&](std::size_t n) { return StaticBackground(panel, year, n, rc.seed); }, options),
      BackgroundSizeSensitivity(
          *model, instances, schema, "B", rc.sizes,
          [&](std::size_t n) { return SlidingWindowBackground(panel, year, n, rc.seed); },
          options),
  };
  CsvWriter bs({"method", "size", "cosine"});
  doc["sensitivity"] = ordered_json::array();
  for (const SensitivityCurve& c : curves) {
    for (std::size_t i = 0; i < c.sizes.size(); ++i) {
      bs.Row({c.method, Int(static_cast<long long>(c.sizes[i])), Num(c.cosines[i])});
    }
    doc["sensitivity"].push_back({{"method", c.method}, {"area", c.area()}});
  }
  ctx.Write("background_sensitivity.csv", bs.str());
  ctx.WriteJson("robustness.json", doc);
}

struct SeriesByMethod {
  std::map<std::string, std::vector<int>> year_to;
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
};

SeriesByMethod ReadStability(const CsvTable& t) {
  SeriesByMethod s;
  const std::size_t method = t.Column("method"), to = t.Column("year_to");
  const char* metrics[] = {"cosine", "kendall_tau", "jaccard_top10"};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& m = t.rows[r][method];
    s.year_to[m].push_back(static_cast<int>(t.Integer(r, to)));
    for (const char* metric : metrics) {
      s.values[m][metric].push_back(t.Number(r, t.Column(metric)));
    }
  }
  return s;
}

void StageStats(StageContext& ctx) {
  const RunConfig& cfg = ctx.config();
  const auto& sc = cfg.stats;
  const SeriesByMethod stab = ReadStability(ctx.Csv("stability.csv"));
  if (!stab.values.count("baseline")) {
    throw StageError("stability.csv has no baseline rows");
  }
  CsvWriter sig({"comparison", "metric", "point", "ci_lo", "ci_hi", "t_p", "wilcoxon_p", "n",
                 "primary"});
  ordered_json doc = ordered_json::array();
  std::uint64_t counter = 0;
  auto compare = [&](const std::string& comparison, const std::string& metric,
                     const std::vector<double>& a, const std::vector<double>& b) {
    const IntervalEstimate ci =
        PairedBootstrapCi(a, b, sc.resamples, sc.level, StreamKey({sc.seed, counter++}));
    std::optional<TestResult> t, w;
    try {
      t = PairedTTest(a, b);
    } catch (const DegenerateError&) {
    }
    try {
      w = WilcoxonSignedRank(a, b);
    } catch (const DegenerateError&) {
    }
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const std::string primary = std::abs(SampleSkewness(d)) > 1.0 ? "wilcoxon" : "paired-t";
    sig.Row({comparison, metric, Num(ci.point), Num(ci.ci_lo), Num(ci.ci_hi),
             t ? Num(t->p_value) : kNa, w ? Num(w->p_value) : kNa,
             Int(static_cast<long long>(a.size())), primary});
    ordered_json j;
    j["comparison"] = comparison;
    j["metric"] = metric;
    j["interval"] = {{"point", ci.point}, {"ci_lo", ci.ci_lo}, {"ci_hi", ci.ci_hi},
                     {"level", ci.level}, {"resamples", ci.resamples}, {"seed", ci.seed}};
    j["paired_t"] = t ? ordered_json{{"statistic", t->statistic}, {"p_value", t->p_value},
                                     {"n", t->n}, {"p_method", t->p_method}}
                      : ordered_json();
    j["wilcoxon"] = w ? ordered_json{{"statistic", w->statistic}, {"p_value", w->p_value},
                                     {"n", w->n}, {"p_method", w->p_method}}
                      : ordered_json();
    j["primary"] = primary;
    doc.push_back(std::move(j));
  };

  for (const std::string& m : {std::string("A"), std::string("B"), std::string("C")}) {
    if (!stab.values.count(m)) continue;
    if (stab.year_to.at(m) != stab.year_to.at("baseline")) {
      throw StageError("stability.csv: method " + m + " covers different years than baseline");
    }
    for (const char* metric : {"cosine", "kendall_tau", "jaccard_top10"}) {
      compare(m + "-vs-baseline", metric, stab.values.at(m).at(metric),
              stab.values.at("baseline").at(metric));
    }
  }

  if (ctx.Exists("fairness.csv")) {
    const CsvTable f = ctx.Csv("fairness.csv");
    const std::size_t ac = f.Column("attribute"), yc = f.Column("year"),
                      mc = f.Column("method"), kc = f.Column("metric"), vc = f.Column("value");
    std::map<std::string, std::map<std::string, std::vector<double>>> dpd;
    std::vector<std::string> order;
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
      const auto& row = f.rows[r];
      if (row[kc] != "dpd" || row[yc] == "pooled") continue;
      if (std::find(order.begin(), order.end(), row[ac]) == order.end()) order.push_back(row[ac]);
      dpd[row[ac]][row[mc]].push_back(f.Number(r, vc));
    }
    for (const auto& attr : order) {
      const auto& u = dpd[attr]["uniform"];
      const auto& rc = dpd[attr]["recalibrated"];
      if (u.size() >= 2 && u.size() == rc.size()) {
        compare("recalibrated-vs-uniform:" + attr, "dpd", rc, u);
      }
    }
  } else {
    ctx.Notice("stats: fairness.csv not found; DPD comparison skipped");
  }
  ctx.Write("significance.csv", sig.str());
  ctx.WriteJson("significance.json", doc);

  CsvWriter tc({"method", "year_from", "year_to", "pearson_r"});
  for (const std::string& m : kMethods) {
    if (!ctx.Exists(ImportanceFile(m))) continue;
    const auto vectors = ReadImportance(ctx, m);
    for (std::size_t i = 1; i < vectors.size(); ++i) {
      std::string r = kNa;
      try {
        r = Num(PearsonCorrelation(vectors[i - 1].values, vectors[i].values));
      } catch (const DegenerateError&) {
      }
      tc.Row({m, Int(vectors[i - 1].year), Int(vectors[i].year), r});
    }
  }
  ctx.Write("temporal_correlation.csv", tc.str());
}

// ---------------------------------------------------------------- plots

std::optional<CsvTable> OptionalReport(const fs::path& dir, const std::string& name,
                                       const NoticeSink& notice) {
  const fs::path path = dir / name;
  if (!fs::exists(path)) {
    if (notice) notice("plots: " + name + " not found; plot skipped");
    return std::nullopt;
  }
  CsvTable t = ReadCsv(path);
  if (t.rows.empty()) {
    if (notice) notice("plots: " + name + " is empty; plot skipped");
    return std::nullopt;
  }
  return t;
}

// Groups rows by the value in `key_col`, keeping first-seen order.
std::vector<std::string> Keys(const CsvTable& t, std::size_t key_col) {
  std::vector<std::string> keys;
  for (const auto& row : t.rows) {
    if (std::find(keys.begin(), keys.end(), row[key_col]) == keys.end()) {
      keys.push_back(row[key_col]);
    }
  }
  return keys;
}

LineSeries SeriesFor(const CsvTable& t, const std::string& name, std::size_t x_col,
                     std::size_t y_col, const std::function<bool(std::size_t)>& keep) {
  LineSeries s;
  s.name = name;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!keep(r)) continue;
    s.x.push_back(t.Number(r, x_col));
    s.y.push_back(t.Number(r, y_col));
  }
  return s;
}

}  // namespace

std::string RenderStabilityPlot(const CsvTable& stability, const std::string& method) {
  const std::size_t mc = stability.Column("method"), xc = stability.Column("year_to");
  LineChart chart;
  chart.title = "Explanation stability, method " + method;
  chart.x_label = "test year";
  chart.y_label = "year-over-year similarity";
  for (const char* metric : {"cosine", "kendall_tau", "jaccard_top10"}) {
    chart.series.push_back(SeriesFor(stability, metric, xc, stability.Column(metric),
                                     [&](std::size_t r) {
                                       return stability.rows[r][mc] == method;
                                     }));
  }
  if (chart.series.front().x.empty()) {
    throw InputError(stability.path + ": no rows for method " + method);
  }
  return RenderLineChart(chart);
}

std::vector<std::string> EmitPlots(const fs::path& dir, const NoticeSink& notice) {
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& svg) {
    WriteFile(dir / name, svg);
    written.push_back(name);
  };
  const auto all = [](std::size_t) { return true; };

  if (auto t = OptionalReport(dir, "panel_summary.csv", notice)) {
    LineChart c{"Default rate and unemployment by year", "year", "share", {}, true};
    c.series.push_back(SeriesFor(*t, "default rate", t->Column("year"),
                                 t->Column("default_rate"), all));
    c.series.push_back(SeriesFor(*t, "unemployed share", t->Column("year"),
                                 t->Column("unemployed_share"), all));
    emit("default_rate.svg", RenderLineChart(c));
  }

  if (auto t = OptionalReport(dir, "drift_report.csv", notice)) {
    const std::size_t fc = t->Column("feature"), kc = t->Column("kind"),
                      yc = t->Column("target_year");
    LineChart psi{"Population stability index vs baseline year", "target year", "PSI", {}, true};
    LineChart js{"Jensen-Shannon divergence vs baseline year", "target year", "JS", {}, true};
    for (const auto& feature : Keys(*t, fc)) {
      auto keep = [&](std::size_t r) { return t->rows[r][fc] == feature; };
      std::size_t first = 0;
      while (t->rows[first][fc] != feature) ++first;
      if (t->rows[first][kc] == "numeric") {
        psi.series.push_back(SeriesFor(*t, feature, yc, t->Column("psi"), keep));
      } else {
        js.series.push_back(SeriesFor(*t, feature, yc, t->Column("js"), keep));
      }
    }
    if (!psi.series.empty()) emit("drift_psi.svg", RenderLineChart(psi));
    if (!js.series.empty()) emit("drift_js.svg", RenderLineChart(js));
  }

  if (auto t = OptionalReport(dir, "metrics.csv", notice)) {
    const std::size_t mc = t->Column("model"), yc = t->Column("test_year");
    LineChart auc{"Test AUC by year", "test year", "AUC", {}, true};
    LineChart f1{"Test F1 at threshold 0.5 by year", "test year", "F1", {}, true};
    for (const auto& model : Keys(*t, mc)) {
      auto keep = [&](std::size_t r) { return t->rows[r][mc] == model; };
      auc.series.push_back(SeriesFor(*t, model, yc, t->Column("auc"), keep));
      f1.series.push_back(SeriesFor(*t, model, yc, t->Column("f1"), keep));
    }
    emit("model_auc.svg", RenderLineChart(auc));
    emit("model_f1.svg", RenderLineChart(f1));
  }

  {
    BarChart bars{"Mean |attribution| in the final test year", "feature", "importance",
                  {}, {}, {}};
    for (const std::string& m : kMethods) {
      const std::string name = ImportanceFile(m);
      if (!fs::exists(dir / name)) continue;
      const CsvTable t = ReadCsv(dir / name);
      if (t.rows.empty()) continue;
      if (bars.categories.empty()) bars.categories.assign(t.header.begin() + 1, t.header.end());
      std::vector<double> values;
      for (std::size_t c = 1; c < t.header.size(); ++c) {
        values.push_back(t.Number(t.rows.size() - 1, c));
      }
      bars.series_names.push_back(m);
      bars.values.push_back(std::move(values));
    }
    if (bars.series_names.empty()) {
      if (notice) notice("plots: no importance_<method>.csv found; plot skipped");
    } else {
      emit("importance_final.svg", RenderBarChart(bars));
    }
  }

  if (auto t = OptionalReport(dir, "stability.csv", notice)) {
    const std::size_t mc = t->Column("method");
    LineChart cos{"Year-over-year cosine of importance vectors", "test year", "cosine", {}, true};
    for (const auto& m : Keys(*t, mc)) {
      emit("stability_" + m + ".svg", RenderStabilityPlot(*t, m));
      cos.series.push_back(SeriesFor(*t, m, t->Column("year_to"), t->Column("cosine"),
                                     [&](std::size_t r) { return t->rows[r][mc] == m; }));
    }
    emit("stability_cosine.svg", RenderLineChart(cos));
  }

  if (auto t = OptionalReport(dir, "fairness.csv", notice)) {
    const std::size_t ac = t->Column("attribute"), yc = t->Column("year"),
                      mc = t->Column("method"), kc = t->Column("metric"), vc = t->Column("value");
    for (const auto& attr : Keys(*t, ac)) {
      BarChart bars{"Demographic parity difference by year, " + attr, "test year", "DPD",
                    {}, {"uniform", "recalibrated"}, {{}, {}}};
      for (std::size_t r = 0; r < t->rows.size(); ++r) {
        const auto& row = t->rows[r];
        if (row[ac] != attr || row[kc] != "dpd" || row[yc] == "pooled") continue;
        if (row[mc] == "uniform") {
          bars.categories.push_back(row[yc]);
          bars.values[0].push_back(t->Number(r, vc));
        } else if (row[mc] == "recalibrated") {
          bars.values[1].push_back(t->Number(r, vc));
        }
      }
      if (!bars.categories.empty()) emit("dpd_" + attr + ".svg", RenderBarChart(bars));
    }
  }

  if (auto t = OptionalReport(dir, "harmful_features.csv", notice)) {
    const std::size_t mc = t->Column("method"), ac = t->Column("attribute"),
                      fc = t->Column("flagged");
    BarChart bars{"Harmful (feature, group) flags by method", "method", "flag count",
                  Keys(*t, mc), Keys(*t, ac), {}};
    for (const auto& attr : bars.series_names) {
      std::vector<double> counts;
      for (const auto& m : bars.categories) {
        double n = 0;
        for (const auto& row : t->rows) {
          if (row[mc] == m && row[ac] == attr && row[fc] == "1") n += 1;
        }
        counts.push_back(n);
      }
      bars.values.push_back(std::move(counts));
    }
    emit("harmful_counts.svg", RenderBarChart(bars));
  }

  if (auto t = OptionalReport(dir, "counterfactuals.csv", notice)) {
    BarChart bars{"Mean probability change under perturbation", "perturbation",
                  "mean delta p", {}, {"mean delta"}, {{}}};
    for (std::size_t r = 0; r < t->rows.size(); ++r) {
      bars.categories.push_back(t->rows[r][t->Column("feature")] + " " +
                                t->rows[r][t->Column("direction")]);
      bars.values[0].push_back(t->Number(r, t->Column("mean_delta")));
    }
    emit("counterfactuals.svg", RenderBarChart(bars));
  }

  if (auto t = OptionalReport(dir, "background_sensitivity.csv", notice)) {
    const std::size_t mc = t->Column("method");
    LineChart c{"Importance cosine vs largest background", "background size", "cosine",
                {}, true};
    for (const auto& m : Keys(*t, mc)) {
      c.series.push_back(SeriesFor(*t, m, t->Column("size"), t->Column("cosine"),
                                   [&](std::size_t r) { return t->rows[r][mc] == m; }));
    }
    emit("background_sensitivity.svg", RenderLineChart(c));
  }

  if (auto t = OptionalReport(dir, "temporal_correlation.csv", notice)) {
    const std::size_t mc = t->Column("method"), rc = t->Column("pearson_r");
    LineChart c{"Pearson r of consecutive importance vectors", "test year", "r", {}, true};
    for (const auto& m : Keys(*t, mc)) {
      c.series.push_back(SeriesFor(*t, m, t->Column("year_to"), rc, [&](std::size_t r) {
        return t->rows[r][mc] == m && t->rows[r][rc] != kNa;
      }));
    }
    c.series.erase(std::remove_if(c.series.begin(), c.series.end(),
                                  [](const LineSeries& s) { return s.x.empty(); }),
                   c.series.end());
    if (!c.series.empty()) emit("temporal_correlation.svg", RenderLineChart(c));
  }
  return written;
}

// ---------------------------------------------------------------- manifest

const std::vector<Stage>& AllStages() {
  static const std::vector<Stage> stages = {
      Stage::kGenerate,  Stage::kDrift,      Stage::kTrain,
      Stage::kExplain,   Stage::kStability,  Stage::kFairness,
      Stage::kRobustness, Stage::kStats,     Stage::kPlots};
  return stages;
}

std::string StageName(Stage stage) {
  switch (stage) {
    case Stage::kGenerate:
      return "generate";
    case Stage::kDrift:
      return "drift";
    case Stage::kTrain:
      return "train";
    case Stage::kExplain:
      return "explain";
    case Stage::kStability:
      return "stability";
    case Stage::kFairness:
      return "fairness";
    case Stage::kRobustness:
      return "robustness";
    case Stage::kStats:
      return "stats";
    case Stage::kPlots:
      return "plots";
  }
  return "unknown";
}

Stage ParseStage(const std::string& name) {
  for (Stage s : AllStages()) {
    if (StageName(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + name + "'");
}

std::vector<Stage> StagesFrom(Stage first) {
  const auto& all = AllStages();
  return {std::find(all.begin(), all.end(), first), all.end()};
}

ordered_json RunManifest::ToJson(bool with_timing) const {
  ordered_json j;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["config"] = {{"file", config.file}, {"sha256", config.sha256}};
  j["stages"] = ordered_json::array();
  for (const StageRecord& s : stages) {
    ordered_json sj;
    sj["name"] = s.name;
    sj["outputs"] = ordered_json::array();
    for (const OutputDigest& o : s.outputs) {
      sj["outputs"].push_back({{"file", o.file}, {"sha256", o.sha256}});
    }
    if (with_timing) {
      sj["wall_seconds"] = s.wall_seconds;
      sj["ran"] = s.ran;
    }
    j["stages"].push_back(std::move(sj));
  }
  j["status"] = status;
  if (!failed_stage.empty()) {
    j["failed_stage"] = failed_stage;
    j["error"] = error;
  }
  return j;
}

RunManifest RunManifest::FromJson(const json& doc, const std::string& origin) {
  try {
    RunManifest m;
    m.config_hash = doc.at("config_hash").get<std::string>();
    m.version = doc.at("version").get<std::string>();
    m.config.file = doc.at("config").at("file").get<std::string>();
    m.config.sha256 = doc.at("config").at("sha256").get<std::string>();
    for (const auto& sj : doc.at("stages")) {
      StageRecord s;
      s.name = sj.at("name").get<std::string>();
      for (const auto& o : sj.at("outputs")) {
        s.outputs.push_back({o.at("file").get<std::string>(), o.at("sha256").get<std::string>()});
      }
      s.wall_seconds = sj.value("wall_seconds", 0.0);
      m.stages.push_back(std::move(s));
    }
    m.status = doc.value("status", std::string("complete"));
    m.failed_stage = doc.value("failed_stage", std::string());
    m.error = doc.value("error", std::string());
    return m;
  } catch (const json::exception& e) {
    throw ParseError(origin + ": malformed manifest: " + e.what());
  }
}

std::map<std::string, std::string> RunManifest::Digests() const {
  std::map<std::string, std::string> out;
  for (const StageRecord& s : stages) {
    for (const OutputDigest& o : s.outputs) out[o.file] = o.sha256;
  }
  return out;
}

// ---------------------------------------------------------------- pipeline

Pipeline::Pipeline(RunConfig config, NoticeSink notice)
    : config_(std::move(config)), notice_(std::move(notice)) {}

RunManifest Pipeline::Run(const RunRequest& request) {
  config_.Validate();
  for (const auto& m : request.methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      throw ConfigError("unknown explanation method '" + m + "'");
    }
  }
  if (request.stages.empty()) throw ConfigError("no stages requested");
  const fs::path dir = config_.out_dir;
  const std::string hash = config_.Hash();

  // Upstream artifacts produced under another configuration cannot be
  // mixed with new downstream results.
  std::optional<RunManifest> previous;
  if (fs::exists(dir / kManifestFile)) {
    try {
      previous = RunManifest::FromJson(json::parse(ReadFile(dir / kManifestFile)),
                                       (dir / kManifestFile).string());
    } catch (const std::exception& e) {
      if (notice_) notice_(std::string("ignoring unreadable manifest: ") + e.what());
    }
  }
  const Stage first = request.stages.front();
  if (first != Stage::kGenerate && previous && previous->config_hash != hash) {
    throw ConfigError("configuration differs from the run that produced the artifacts in " +
                      dir.string() + "; rerun from the generate stage");
  }

  PrepareDirectory(dir);
  DirectoryLock lock(dir / kLockFile);

  const std::string config_text = config_.ToJson(false).dump(2) + "\n";
  WriteFile(dir / kConfigFile, config_text);

  RunManifest manifest;
  manifest.config_hash = hash;
  manifest.config = {kConfigFile, Sha256Hex(config_text)};

  // Records of earlier stages that are not rerun are carried over with
  // digests refreshed from disk; later stages become stale and are dropped.
  std::map<std::string, StageRecord> records;
  if (previous && previous->config_hash == hash) {
    for (const StageRecord& s : previous->stages) {
      const Stage stage = ParseStage(s.name);
      if (stage >= first) continue;
      StageRecord kept;
      kept.name = s.name;
      kept.wall_seconds = s.wall_seconds;
      for (const OutputDigest& o : s.outputs) {
        if (fs::exists(dir / o.file)) kept.outputs.push_back({o.file, FileDigest(dir / o.file)});
      }
      records[s.name] = std::move(kept);
    }
  }

  auto flush = [&]() {
    manifest.stages.clear();
    for (Stage s : AllStages()) {
      auto it = records.find(StageName(s));
      if (it != records.end()) manifest.stages.push_back(it->second);
    }
    WriteFile(dir / kManifestFile, manifest.ToJson().dump(2) + "\n");
  };

  for (Stage stage : request.stages) {
    const std::string name = StageName(stage);
    StageContext ctx(config_, dir, notice_);
    const auto start = std::chrono::steady_clock::now();
    try {
      switch (stage) {
        case Stage::kGenerate:
          StageGenerate(ctx);
          break;
        case Stage::kDrift:
          StageDrift(ctx);
          break;
        case Stage::kTrain:
          StageTrain(ctx);
          break;
        case Stage::kExplain:
          StageExplain(ctx, request.methods);
          break;
        case Stage::kStability:
          StageStability(ctx);
          break;
        case Stage::kFairness:
          StageFairness(ctx);
          break;
        case Stage::kRobustness:
          StageRobustness(ctx);
          break;
        case Stage::kStats:
          StageStats(ctx);
          break;
        case Stage::kPlots:
          for (const auto& file : EmitPlots(dir, notice_)) ctx.Record(file);
          break;
      }
    } catch (const std::exception& e) {
      manifest.status = "failed";
      manifest.failed_stage = name;
      manifest.error = e.what();
      flush();
      throw StageError("stage " + name + " failed: " + e.what());
    }
    StageRecord rec;
    rec.name = name;
    rec.ran = true;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& file : ctx.outputs()) {
      rec.outputs.push_back({file, FileDigest(dir / file)});
    }
    records[name] = std::move(rec);
    flush();
  }
  return manifest;
}

}  // namespace driftscope
