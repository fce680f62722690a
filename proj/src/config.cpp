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
#include "driftscope/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "driftscope/errors.hpp"
#include "driftscope/schema.hpp"

namespace driftscope {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be rejected as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": must be a JSON object");
  }

  const json* Find(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string Path(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void Int(const char* key, int& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_integer()) throw ConfigError(Path(key) + ": must be an integer");
      const auto x = v->get<std::int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(Path(key) + ": out of range");
      out = static_cast<int>(x);
    }
  }
  void U64(const char* key, std::uint64_t& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_unsigned()) {
        throw ConfigError(Path(key) + ": must be a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void Size(const char* key, std::size_t& out) {
    std::uint64_t x = out;
    U64(key, x);
    out = static_cast<std::size_t>(x);
  }
  void Double(const char* key, double& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number()) throw ConfigError(Path(key) + ": must be a number");
      out = v->get<double>();
    }
  }
  void Bool(const char* key, bool& out) {
    if (const json* v = Find(key)) {
      if (!v->is_boolean()) throw ConfigError(Path(key) + ": must be true or false");
      out = v->get<bool>();
    }
  }
  void String(const char* key, std::string& out) {
    if (const json* v = Find(key)) {
      if (!v->is_string()) throw ConfigError(Path(key) + ": must be a string");
      out = v->get<std::string>();
    }
  }
  void IntList(const char* key, std::vector<int>& out) {
    if (const json* v = Find(key)) {
      if (!v->is_array()) throw ConfigError(Path(key) + ": must be an array");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_integer()) {
          throw ConfigError(Path(key) + ": entries must be integers");
        }
        out.push_back(e.get<int>());
      }
    }
  }
  void StringList(const char* key, std::vector<std::string>& out) {
    if (const json* v = Find(key)) {
      if (!v->is_array()) throw ConfigError(Path(key) + ": must be an array");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) throw ConfigError(Path(key) + ": entries must be strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  // Runs `read` on a nested object when present.
  template <typename F>
  void Child(const char* key, F&& read) {
    if (const json* v = Find(key)) {
      Section child(*v, Path(key));
      read(child);
      child.Finish();
    }
  }

  void Finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(Path(key.c_str()) + ": unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

ShapleyMode ParseShapleyMode(const std::string& name) {
  if (name == "auto") return ShapleyMode::kAuto;
  if (name == "exact") return ShapleyMode::kExact;
  if (name == "sampled") return ShapleyMode::kSampled;
  throw ConfigError("explanation.mode: expected auto, exact or sampled, got '" +
                    name + "'");
}

DriftWeightSource ParseDriftWeightSource(const std::string& name) {
  if (name == "train-window") return DriftWeightSource::kTrainWindow;
  if (name == "baseline-year") return DriftWeightSource::kBaselineYear;
  throw ConfigError(
      "method_a.weights_source: expected train-window or baseline-year, got '" +
      name + "'");
}

void ReadGenerator(Section& s, GeneratorConfig& g) {
  s.U64("seed", g.seed);
  s.IntList("years", g.years);
  s.Int("rows_per_year", g.rows_per_year);
  s.Double("base_default_rate", g.base_default_rate);
  s.Double("final_default_rate", g.final_default_rate);
  s.IntList("recession_years", g.recession_years);
  s.Double("base_unemployment", g.base_unemployment);
  s.Double("recession_unemployment", g.recession_unemployment);
  s.Double("income_drift_per_year", g.income_drift_per_year);
  s.Double("score_drift_per_year", g.score_drift_per_year);
  s.Double("proxy_strength", g.proxy_strength);
  if (const json* v = s.Find("coefficient_schedule")) {
    const std::string path = s.Path("coefficient_schedule");
    if (!v->is_object()) throw ConfigError(path + ": must be an object keyed by year");
    g.coefficient_schedule.clear();
    for (const auto& [key, row] : v->items()) {
      int year = 0;
      try {
        std::size_t used = 0;
        year = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw ConfigError(path + ": key '" + key + "' is not a year");
      }
      if (!row.is_array()) throw ConfigError(path + "." + key + ": must be an array");
      std::vector<double> weights;
      for (const auto& w : row) {
        if (!w.is_number()) throw ConfigError(path + "." + key + ": entries must be numbers");
        weights.push_back(w.get<double>());
      }
      g.coefficient_schedule[year] = std::move(weights);
    }
  }
}

void ReadModels(Section& s, ModelsConfig& m) {
  if (const json* v = s.Find("compare")) {
    if (!v->is_array()) throw ConfigError("models.compare: must be an array");
    m.compare.clear();
    for (const auto& e : *v) {
      if (!e.is_string()) throw ConfigError("models.compare: entries must be strings");
      try {
        m.compare.push_back(ParseModelKind(e.get<std::string>()));
      } catch (const ConfigError& err) {
        throw ConfigError(std::string("models.compare: ") + err.what());
      }
    }
  }
  s.Bool("include_sensitive", m.params.include_sensitive);
  s.Child("gbdt", [&](Section& c) {
    auto& p = m.params.gbdt;
    c.Int("n_trees", p.n_trees);
    c.Int("max_depth", p.max_depth);
    c.Double("learning_rate", p.learning_rate);
    c.Double("min_leaf", p.min_leaf);
    c.Double("subsample", p.subsample);
    c.Double("lambda", p.lambda);
    c.U64("seed", p.seed);
  });
  s.Child("logistic", [&](Section& c) {
    auto& p = m.params.logistic;
    c.Double("l2", p.l2);
    c.Int("max_iter", p.max_iter);
    c.Double("tol", p.tol);
  });
  s.Child("forest", [&](Section& c) {
    auto& p = m.params.forest;
    c.Int("n_trees", p.n_trees);
    c.Int("max_depth", p.max_depth);
    c.Double("min_leaf", p.min_leaf);
    c.Bool("bootstrap", p.bootstrap);
    c.Bool("feature_subsample", p.feature_subsample);
    c.U64("seed", p.seed);
  });
}

PerturbationSpec ReadPerturbation(const json& node, const std::string& path) {
  Section s(node, path);
  PerturbationSpec spec;
  s.String("feature", spec.feature);
  const json* magnitude = s.Find("magnitude");
  const json* level = s.Find("level");
  if ((magnitude == nullptr) == (level == nullptr)) {
    throw ConfigError(path + ": give exactly one of magnitude or level");
  }
  if (magnitude != nullptr) {
    if (!magnitude->is_number()) throw ConfigError(path + ".magnitude: must be a number");
    spec.kind = PerturbationKind::kMultiplicative;
    spec.magnitude = magnitude->get<double>();
  } else {
    if (!level->is_string()) throw ConfigError(path + ".level: must be a string");
    spec.kind = PerturbationKind::kLevelFlip;
    spec.level = level->get<std::string>();
  }
  s.Finish();
  return spec;
}

void ReadFairness(Section& s, FairnessConfig& f) {
  s.StringList("attributes", f.attributes);
  s.Child("recalibration", [&](Section& c) {
    auto& r = f.recalibration;
    c.Double("base_threshold", r.base_threshold);
    c.Double("grid_step", r.grid_step);
    c.Double("grid_lo", r.grid_lo);
    c.Double("grid_hi", r.grid_hi);
    c.Double("rate_tolerance", r.rate_tolerance);
    c.Size("min_group_size", r.min_group_size);
  });
  s.Int("bootstrap_resamples", f.bootstrap_resamples);
  s.Double("level", f.level);
  s.U64("seed", f.seed);
  s.Child("harmful", [&](Section& c) {
    auto& h = f.harmful;
    c.Double("delta", h.delta);
    c.Int("resamples", h.resamples);
    c.Double("level", h.level);
    c.U64("seed", h.seed);
    c.Size("min_group_size", h.min_group_size);
  });
  s.Child("proxy", [&](Section& c) {
    c.Double("alpha", f.proxy.alpha);
    c.Double("min_effect", f.proxy.min_effect);
  });
}

void ReadRobustness(Section& s, RobustnessConfig& r) {
  if (const json* v = s.Find("perturbations")) {
    const std::string path = s.Path("perturbations");
    if (!v->is_array()) throw ConfigError(path + ": must be an array");
    r.perturbations.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      r.perturbations.push_back(
          ReadPerturbation((*v)[i], path + "[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = s.Find("sizes")) {
    if (!v->is_array()) throw ConfigError("robustness.sizes: must be an array");
    r.sizes.clear();
    for (const auto& e : *v) {
      if (!e.is_number_unsigned()) {
        throw ConfigError("robustness.sizes: entries must be positive integers");
      }
      r.sizes.push_back(e.get<std::size_t>());
    }
  }
  s.Int("instances", r.instances);
  s.U64("seed", r.seed);
}

void RequireProbability(double p, const char* field) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError(std::string(field) + ": must lie in (0, 1)");
}

void RequirePositive(double x, const char* field) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw ConfigError(std::string(field) + ": must be a finite value > 0");
  }
}

ordered_json PerturbationJson(const PerturbationSpec& p) {
  ordered_json j;
  j["feature"] = p.feature;
  if (p.kind == PerturbationKind::kMultiplicative) {
    j["magnitude"] = p.magnitude;
  } else {
    j["level"] = p.level;
  }
  return j;
}

}  // namespace

RobustnessConfig::RobustnessConfig() {
  PerturbationSpec down;
  down.feature = "credit_score";
  down.magnitude = -0.10;
  PerturbationSpec up = down;
  up.magnitude = 0.10;
  PerturbationSpec flip;
  flip.feature = "employment_status";
  flip.kind = PerturbationKind::kLevelFlip;
  flip.level = "unemployed";
  perturbations = {down, up, flip};
}

std::string ShapleyModeName(ShapleyMode mode) {
  switch (mode) {
    case ShapleyMode::kAuto:
      return "auto";
    case ShapleyMode::kExact:
      return "exact";
    case ShapleyMode::kSampled:
      return "sampled";
  }
  return "auto";
}

std::string DriftWeightSourceName(DriftWeightSource source) {
  return source == DriftWeightSource::kTrainWindow ? "train-window" : "baseline-year";
}

void RunConfig::Validate() const {
  generator.Validate();

  const auto& t = drift.thresholds;
  RequirePositive(t.psi, "drift.psi_threshold");
  RequireProbability(t.chi2_alpha, "drift.chi2_alpha");
  if (t.bins < 1) throw ConfigError("drift.bins: must be >= 1");
  RequirePositive(t.epsilon, "drift.epsilon");
  if (drift.baseline_year != 0) {
    const auto& ys = generator.years;
    if (std::find(ys.begin(), ys.end(), drift.baseline_year) == ys.end()) {
      throw ConfigError("drift.baseline_year: not one of generator.years");
    }
  }

  const auto& g = models.params.gbdt;
  if (g.n_trees < 1) throw ConfigError("models.gbdt.n_trees: must be >= 1");
  if (g.max_depth < 1) throw ConfigError("models.gbdt.max_depth: must be >= 1");
  RequirePositive(g.learning_rate, "models.gbdt.learning_rate");
  RequirePositive(g.min_leaf, "models.gbdt.min_leaf");
  if (!(g.subsample > 0.0 && g.subsample <= 1.0)) {
    throw ConfigError("models.gbdt.subsample: must lie in (0, 1]");
  }
  if (!(g.lambda >= 0.0)) throw ConfigError("models.gbdt.lambda: must be >= 0");
  const auto& l = models.params.logistic;
  if (!(l.l2 >= 0.0)) throw ConfigError("models.logistic.l2: must be >= 0");
  if (l.max_iter < 1) throw ConfigError("models.logistic.max_iter: must be >= 1");
  RequirePositive(l.tol, "models.logistic.tol");
  const auto& f = models.params.forest;
  if (f.n_trees < 1) throw ConfigError("models.forest.n_trees: must be >= 1");
  if (f.max_depth < 1) throw ConfigError("models.forest.max_depth: must be >= 1");
  RequirePositive(f.min_leaf, "models.forest.min_leaf");
  for (ModelKind k : models.compare) {
    if (k == ModelKind::kGbdt) {
      throw ConfigError("models.compare: gbdt is the primary model, list only others");
    }
  }

  if (explanation.instances < 1) throw ConfigError("explanation.instances: must be >= 1");
  if (explanation.background < 1) throw ConfigError("explanation.background: must be >= 1");
  if (explanation.n_permutations < 1) {
    throw ConfigError("explanation.n_permutations: must be >= 1");
  }
  if (explanation.instances > generator.rows_per_year) {
    throw ConfigError("explanation.instances: exceeds generator.rows_per_year");
  }
  if (explanation.background > generator.rows_per_year) {
    throw ConfigError("explanation.background: exceeds generator.rows_per_year");
  }
  if (method_b.window < 1) throw ConfigError("method_b.window: must be >= 1");
  method_c.Validate();
  if (stability.k < 1) throw ConfigError("stability.k: must be >= 1");

  if (fairness.attributes.empty()) throw ConfigError("fairness.attributes: must not be empty");
  const Schema& schema = Schema::Lending();
  for (const auto& a : fairness.attributes) {
    std::size_t idx = 0;
    try {
      idx = schema.IndexOf(a);
    } catch (const Error&) {
      throw ConfigError("fairness.attributes: unknown feature '" + a + "'");
    }
    if (!schema.feature(idx).is_categorical()) {
      throw ConfigError("fairness.attributes: '" + a + "' is not categorical");
    }
  }
  const auto& r = fairness.recalibration;
  RequirePositive(r.grid_step, "fairness.recalibration.grid_step");
  if (!(r.grid_lo >= 0.0 && r.grid_lo <= r.base_threshold && r.base_threshold <= r.grid_hi &&
        r.grid_hi <= 1.0)) {
    throw ConfigError(
        "fairness.recalibration: need 0 <= grid_lo <= base_threshold <= grid_hi <= 1");
  }
  const double steps = (r.base_threshold - r.grid_lo) / r.grid_step;
  if (std::abs(steps - std::round(steps)) > 1e-6) {
    throw ConfigError("fairness.recalibration.base_threshold: must lie on the grid");
  }
  if (!(r.rate_tolerance >= 0.0)) {
    throw ConfigError("fairness.recalibration.rate_tolerance: must be >= 0");
  }
  if (r.min_group_size < 1) {
    throw ConfigError("fairness.recalibration.min_group_size: must be >= 1");
  }
  if (fairness.bootstrap_resamples < 1) {
    throw ConfigError("fairness.bootstrap_resamples: must be >= 1");
  }
  RequireProbability(fairness.level, "fairness.level");
  if (!(fairness.harmful.delta >= 0.0)) throw ConfigError("fairness.harmful.delta: must be >= 0");
  if (fairness.harmful.resamples < 1) {
    throw ConfigError("fairness.harmful.resamples: must be >= 1");
  }
  RequireProbability(fairness.harmful.level, "fairness.harmful.level");
  if (fairness.harmful.min_group_size < 1) {
    throw ConfigError("fairness.harmful.min_group_size: must be >= 1");
  }
  RequireProbability(fairness.proxy.alpha, "fairness.proxy.alpha");
  if (!(fairness.proxy.min_effect >= 0.0)) {
    throw ConfigError("fairness.proxy.min_effect: must be >= 0");
  }

  for (std::size_t i = 0; i < robustness.perturbations.size(); ++i) {
    try {
      robustness.perturbations[i].Validate(schema);
    } catch (const Error& e) {
      throw ConfigError("robustness.perturbations[" + std::to_string(i) + "]: " +
                        e.what());
    }
  }
  if (robustness.sizes.size() < 2) throw ConfigError("robustness.sizes: need >= 2 sizes");
  for (std::size_t i = 0; i < robustness.sizes.size(); ++i) {
    if (robustness.sizes[i] < 1 || (i > 0 && robustness.sizes[i] <= robustness.sizes[i - 1])) {
      throw ConfigError("robustness.sizes: must be positive and strictly ascending");
    }
  }
  if (robustness.instances < 1) throw ConfigError("robustness.instances: must be >= 1");
  if (robustness.instances > generator.rows_per_year) {
    throw ConfigError("robustness.instances: exceeds generator.rows_per_year");
  }

  if (stats.resamples < 1) throw ConfigError("stats.resamples: must be >= 1");
  RequireProbability(stats.level, "stats.level");
  if (out_dir.empty()) throw ConfigError("out_dir: must not be empty");
}

ordered_json RunConfig::ToJson(bool include_out_dir) const {
  ordered_json j;
  auto& g = j["generator"];
  g["seed"] = generator.seed;
  g["years"] = generator.years;
  g["rows_per_year"] = generator.rows_per_year;
  g["base_default_rate"] = generator.base_default_rate;
  g["final_default_rate"] = generator.final_default_rate;
  g["recession_years"] = generator.recession_years;
  g["base_unemployment"] = generator.base_unemployment;
  g["recession_unemployment"] = generator.recession_unemployment;
  g["income_drift_per_year"] = generator.income_drift_per_year;
  g["score_drift_per_year"] = generator.score_drift_per_year;
  g["proxy_strength"] = generator.proxy_strength;
  g["coefficient_schedule"] = ordered_json::object();
  for (const auto& [year, weights] : generator.coefficient_schedule) {
    g["coefficient_schedule"][std::to_string(year)] = weights;
  }

  auto& d = j["drift"];
  d["psi_threshold"] = drift.thresholds.psi;
  d["chi2_alpha"] = drift.thresholds.chi2_alpha;
  d["bins"] = drift.thresholds.bins;
  d["epsilon"] = drift.thresholds.epsilon;
  d["baseline_year"] = drift.baseline_year;

  auto& m = j["models"];
  m["compare"] = ordered_json::array();
  for (ModelKind k : models.compare) m["compare"].push_back(ModelKindName(k));
  m["include_sensitive"] = models.params.include_sensitive;
  const auto& gb = models.params.gbdt;
  m["gbdt"] = {{"n_trees", gb.n_trees},     {"max_depth", gb.max_depth},
               {"learning_rate", gb.learning_rate}, {"min_leaf", gb.min_leaf},
               {"subsample", gb.subsample}, {"lambda", gb.lambda},
               {"seed", gb.seed}};
  const auto& lg = models.params.logistic;
  m["logistic"] = {{"l2", lg.l2}, {"max_iter", lg.max_iter}, {"tol", lg.tol}};
  const auto& fo = models.params.forest;
  m["forest"] = {{"n_trees", fo.n_trees},
                 {"max_depth", fo.max_depth},
                 {"min_leaf", fo.min_leaf},
                 {"bootstrap", fo.bootstrap},
                 {"feature_subsample", fo.feature_subsample},
                 {"seed", fo.seed}};

  j["explanation"] = {{"instances", explanation.instances},
                      {"background", explanation.background},
                      {"mode", ShapleyModeName(explanation.mode)},
                      {"n_permutations", explanation.n_permutations},
                      {"seed", explanation.seed}};
  j["method_a"] = {{"weights_source", DriftWeightSourceName(method_a.source)}};
  j["method_b"] = {{"window", method_b.window}};
  j["method_c"] = {{"forgetting", method_c.forgetting},
                   {"penalty", method_c.penalty},
                   {"trigger_cosine", method_c.trigger_cosine},
                   {"blend", method_c.blend}};
  j["stability"] = {{"k", stability.k}};

  auto& f = j["fairness"];
  f["attributes"] = fairness.attributes;
  const auto& r = fairness.recalibration;
  f["recalibration"] = {{"base_threshold", r.base_threshold},
                        {"grid_step", r.grid_step},
                        {"grid_lo", r.grid_lo},
                        {"grid_hi", r.grid_hi},
                        {"rate_tolerance", r.rate_tolerance},
                        {"min_group_size", r.min_group_size}};
  f["bootstrap_resamples"] = fairness.bootstrap_resamples;
  f["level"] = fairness.level;
  f["seed"] = fairness.seed;
  const auto& h = fairness.harmful;
  f["harmful"] = {{"delta", h.delta},
                  {"resamples", h.resamples},
                  {"level", h.level},
                  {"seed", h.seed},
                  {"min_group_size", h.min_group_size}};
  f["proxy"] = {{"alpha", fairness.proxy.alpha},
                {"min_effect", fairness.proxy.min_effect}};

  auto& rb = j["robustness"];
  rb["perturbations"] = ordered_json::array();
  for (const auto& p : robustness.perturbations) {
    rb["perturbations"].push_back(PerturbationJson(p));
  }
  rb["sizes"] = robustness.sizes;
  rb["instances"] = robustness.instances;
  rb["seed"] = robustness.seed;

  j["stats"] = {{"resamples", stats.resamples},
                {"level", stats.level},
                {"seed", stats.seed}};
  if (include_out_dir) j["out_dir"] = out_dir;
  return j;
}

RunConfig RunConfig::FromJson(const json& doc) {
  RunConfig c;
  Section root(doc, "");
  root.Child("generator", [&](Section& s) { ReadGenerator(s, c.generator); });
  root.Child("drift", [&](Section& s) {
    s.Double("psi_threshold", c.drift.thresholds.psi);
    s.Double("chi2_alpha", c.drift.thresholds.chi2_alpha);
    s.Size("bins", c.drift.thresholds.bins);
    s.Double("epsilon", c.drift.thresholds.epsilon);
    s.Int("baseline_year", c.drift.baseline_year);
  });
  root.Child("models", [&](Section& s) { ReadModels(s, c.models); });
  root.Child("explanation", [&](Section& s) {
    s.Int("instances", c.explanation.instances);
    s.Int("background", c.explanation.background);
    std::string mode = ShapleyModeName(c.explanation.mode);
    s.String("mode", mode);
    c.explanation.mode = ParseShapleyMode(mode);
    s.Int("n_permutations", c.explanation.n_permutations);
    s.U64("seed", c.explanation.seed);
  });
  root.Child("method_a", [&](Section& s) {
    std::string source = DriftWeightSourceName(c.method_a.source);
    s.String("weights_source", source);
    c.method_a.source = ParseDriftWeightSource(source);
  });
  root.Child("method_b", [&](Section& s) { s.Int("window", c.method_b.window); });
  root.Child("method_c", [&](Section& s) {
    s.Double("forgetting", c.method_c.forgetting);
    s.Double("penalty", c.method_c.penalty);
    s.Double("trigger_cosine", c.method_c.trigger_cosine);
    s.Double("blend", c.method_c.blend);
  });
  root.Child("stability", [&](Section& s) { s.Int("k", c.stability.k); });
  root.Child("fairness", [&](Section& s) { ReadFairness(s, c.fairness); });
  root.Child("robustness", [&](Section& s) { ReadRobustness(s, c.robustness); });
  root.Child("stats", [&](Section& s) {
    s.Int("resamples", c.stats.resamples);
    s.Double("level", c.stats.level);
    s.U64("seed", c.stats.seed);
  });
  root.String("out_dir", c.out_dir);
  root.Finish();
  return c;
}

std::string RunConfig::Hash() const { return Sha256Hex(ToJson(false).dump()); }

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return RunConfig::FromJson(doc);
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw StageError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace driftscope
