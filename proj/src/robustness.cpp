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
#include "driftscope/robustness.hpp"

#include <algorithm>
#include <cmath>

#include "driftscope/encoding.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/special.hpp"
#include "driftscope/stability.hpp"

namespace driftscope {

void PerturbationSpec::Validate(const Schema& schema) const {
  const std::size_t f = schema.IndexOf(feature);
  const FeatureSpec& s = schema.feature(f);
  if (kind == PerturbationKind::kMultiplicative) {
    if (s.is_categorical()) {
      throw InputError("perturbation: '" + feature + "' is categorical; use a level flip");
    }
    if (!(magnitude > -1.0 && magnitude < 1.0) || magnitude == 0.0) {
      throw InputError("perturbation: magnitude must lie in (-1, 1) and be nonzero");
    }
  } else {
    if (!s.is_categorical()) {
      throw InputError("perturbation: '" + feature + "' is numeric; use a multiplicative change");
    }
    if (!s.has_level(level)) {
      throw InputError("perturbation: '" + feature + "' has no level '" + level + "'");
    }
  }
}

std::string PerturbationSpec::direction() const {
  if (kind == PerturbationKind::kLevelFlip) return "->" + level;
  const long pct = std::lround(magnitude * 100.0);
  return (pct > 0 ? "+" : "") + std::to_string(pct) + "%";
}

CounterfactualResult CounterfactualSweep(const Predictor& model,
                                         std::span<const LoanRecord> records,
                                         const Schema& schema,
                                         const PerturbationSpec& spec) {
  spec.Validate(schema);
  if (records.empty()) throw InputError("counterfactual: no records");
  const std::size_t f = schema.IndexOf(spec.feature);
  const FeatureSpec& fs = schema.feature(f);
  const int target = spec.kind == PerturbationKind::kLevelFlip ? schema.LevelIndex(f, spec.level) : -1;

  CounterfactualResult out;
  out.spec = spec;
  std::vector<double> before(model.columns().size());
  std::vector<double> after(model.columns().size());
  for (const LoanRecord& r : records) {
    LoanRecord p = r;
    if (spec.kind == PerturbationKind::kMultiplicative) {
      p[f] = std::clamp(r[f] * (1.0 + spec.magnitude), fs.lower, fs.upper);
    } else {
      if (r.level(f) == target) {
        ++out.skipped;
        continue;
      }
      p[f] = target;
    }
    EncodeRow(r, model.columns(), schema, before);
    EncodeRow(p, model.columns(), schema, after);
    out.deltas.push_back(model.PredictProba(after) - model.PredictProba(before));
  }
  if (out.deltas.empty()) throw InputError("counterfactual: every record already has the target level");
  double sum = 0.0;
  for (double d : out.deltas) sum += d;
  out.mean_delta = sum / static_cast<double>(out.deltas.size());
  std::vector<double> sorted = out.deltas;
  std::sort(sorted.begin(), sorted.end());
  out.p5 = SortedQuantile(sorted, 0.05);
  out.p95 = SortedQuantile(sorted, 0.95);
  return out;
}

double SensitivityCurve::area() const {
  double a = 0.0;
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    const double w = std::log2(static_cast<double>(sizes[i])) -
                     std::log2(static_cast<double>(sizes[i - 1]));
    a += 0.5 * w * ((1.0 - cosines[i]) + (1.0 - cosines[i - 1]));
  }
  return a;
}

SensitivityCurve BackgroundSizeSensitivity(const Predictor& model,
                                           std::span<const LoanRecord> instances,
                                           const Schema& schema,
                                           const std::string& method,
                                           const std::vector<std::size_t>& sizes,
                                           const BackgroundDraw& draw,
                                           const ExplainOptions& options) {
  if (sizes.empty()) throw InputError("background sensitivity: no sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || (i > 0 && sizes[i] <= sizes[i - 1])) {
      throw InputError("background sensitivity: sizes must be positive and strictly ascending");
    }
  }
  if (instances.empty()) throw InputError("background sensitivity: no instances");
  SensitivityCurve curve;
  curve.method = method;
  curve.sizes = sizes;
  std::vector<ImportanceVector> vectors;
  for (std::size_t size : sizes) {
    const BackgroundSet bg = draw(size);
    if (bg.size() != size) {
      throw InputError("background sensitivity: size " + std::to_string(size) +
                       " exceeds the available pool of " + std::to_string(bg.size()));
    }
    vectors.push_back(MeanAbsImportance(Explain(model, instances, bg, schema, options)));
  }
  const ImportanceVector& ref = vectors.back();
  for (const ImportanceVector& v : vectors) {
    curve.cosines.push_back(CosineSimilarity(v.values, ref.values).value);
  }
  return curve;
}

}  // namespace driftscope
