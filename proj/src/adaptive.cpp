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
#include "driftscope/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "driftscope/errors.hpp"
#include "driftscope/rng.hpp"
#include "driftscope/stability.hpp"

namespace driftscope {
namespace {

// Stream tags for background draws.
constexpr std::uint64_t kStaticStream = 0x51;
constexpr std::uint64_t kWindowStream = 0x52;

}  // namespace

BackgroundSet StaticBackground(const Panel& panel, int test_year,
                               std::size_t size, std::uint64_t seed) {
  if (size == 0) throw InputError("static background: size must be positive");
  const std::vector<LoanRecord> pool = panel.RecordsBefore(test_year);
  if (pool.empty()) {
    throw InputError("static background: no records before " + std::to_string(test_year));
  }
  BackgroundSet out;
  out.provenance = BackgroundProvenance::kStaticTrain;
  for (std::size_t i : SampleIndices(
           pool.size(), size,
           StreamKey({seed, static_cast<std::uint64_t>(test_year), kStaticStream}))) {
    out.records.push_back(pool[i]);
  }
  out.Canonicalize();
  return out;
}

BackgroundSet SlidingWindowBackground(const Panel& panel, int test_year,
                                      std::size_t window, std::uint64_t seed) {
  if (window == 0) throw InputError("sliding window: size must be positive");
  BackgroundSet out;
  out.provenance = BackgroundProvenance::kSlidingWindow;
  std::size_t remaining = window;
  const auto& slices = panel.slices();
  for (auto it = slices.rbegin(); it != slices.rend() && remaining > 0; ++it) {
    if (it->year >= test_year) continue;
    const std::vector<LoanRecord>& recs = it->records;
    if (recs.size() <= remaining) {
      out.records.insert(out.records.end(), recs.begin(), recs.end());
      remaining -= recs.size();
    } else {
      const std::uint64_t key =
          StreamKey({seed, static_cast<std::uint64_t>(test_year),
                     static_cast<std::uint64_t>(it->year), kWindowStream});
      for (std::size_t i : SampleIndices(recs.size(), remaining, key)) {
        out.records.push_back(recs[i]);
      }
      remaining = 0;
    }
  }
  if (out.records.empty()) {
    throw InputError("sliding window: no records before " + std::to_string(test_year));
  }
  out.Canonicalize();
  return out;
}

DriftWeights DriftWeights::FromScores(std::vector<std::string> features,
                                      std::vector<double> scores) {
  if (features.size() != scores.size()) {
    throw ShapeError("drift weights: feature and score counts differ");
  }
  DriftWeights w;
  w.features = std::move(features);
  w.scores = std::move(scores);
  for (double d : w.scores) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw NumericError("drift weights: scores must be finite and >= 0");
    }
    w.weights.push_back(1.0 / (1.0 + d));
  }
  return w;
}

DriftWeights ComputeDriftWeights(std::span<const LoanRecord> train,
                                 std::span<const LoanRecord> test,
                                 const Schema& schema, const ColumnMap& columns,
                                 const DriftThresholds& thresholds) {
  std::vector<std::size_t> features;
  for (const FeatureBlock& b : columns.blocks()) features.push_back(b.feature);
  const DriftReport report =
      MakeDriftReport(train, test, schema, thresholds, 0, 0, features);
  std::vector<std::string> names;
  std::vector<double> scores;
  for (const FeatureDrift& d : report.features) {
    names.push_back(d.feature);
    scores.push_back(d.score());
  }
  return DriftWeights::FromScores(std::move(names), std::move(scores));
}

ImportanceVector MethodAAdjust(const ImportanceVector& importance,
                               const DriftWeights& weights) {
  if (importance.features != weights.features ||
      importance.values.size() != weights.weights.size()) {
    throw ShapeError("method A: importance and drift weights cover different features");
  }
  ImportanceVector out = importance;
  out.method = "A";
  for (std::size_t j = 0; j < out.values.size(); ++j) {
    out.values[j] = importance.values[j] * weights.weights[j];
  }
  return out;
}

void SurrogateParams::Validate() const {
  if (!(forgetting >= 0.0 && forgetting <= 1.0)) {
    throw ConfigError("method_c.forgetting: must lie in [0, 1]");
  }
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) {
    throw ConfigError("method_c.penalty: must be finite and >= 0");
  }
  if (!std::isfinite(trigger_cosine)) {
    throw ConfigError("method_c.trigger_cosine: must be finite");
  }
  if (!(blend >= 0.0 && blend <= 1.0)) {
    throw ConfigError("method_c.blend: must lie in [0, 1]");
  }
}

RidgeSurrogate::RidgeSurrogate(SurrogateParams params) : params_(params) {
  params_.Validate();
}

void RidgeSurrogate::FreezeStandardization(const EncodedMatrix& rows) {
  if (rows.rows == 0) throw InputError("surrogate: no rows to standardize on");
  const std::size_t p = rows.cols;
  mean_.assign(p, 0.0);
  scale_.assign(p, 0.0);
  const auto n = static_cast<double>(rows.rows);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    for (std::size_t c = 0; c < p; ++c) mean_[c] += rows.at(i, c);
  }
  for (double& m : mean_) m /= n;
  for (std::size_t i = 0; i < rows.rows; ++i) {
    for (std::size_t c = 0; c < p; ++c) {
      const double d = rows.at(i, c) - mean_[c];
      scale_[c] += d * d;
    }
  }
  for (double& s : scale_) {
    s = std::sqrt(s / n);
    if (!(s > 0.0)) s = 1.0;
  }
}

std::vector<double> RidgeSurrogate::Standardized(std::span<const double> row) const {
  std::vector<double> z(dim());
  for (std::size_t c = 0; c < mean_.size(); ++c) z[c] = (row[c] - mean_[c]) / scale_[c];
  z.back() = 1.0;
  return z;
}

void RidgeSurrogate::Update(const AttributionMatrix& attrs, const EncodedMatrix& rows) {
  if (attrs.rows() != rows.rows) {
    throw ShapeError("surrogate update: " + std::to_string(attrs.rows()) +
                     " attribution rows vs " + std::to_string(rows.rows) + " encoded rows");
  }
  if (rows.rows == 0) throw InputError("surrogate update: no rows");
  if (frozen() && rows.cols != mean_.size()) {
    throw ShapeError("surrogate update: encoded width changed");
  }
  if (fitted() && attrs.features != features_) {
    throw ShapeError("surrogate update: attribution features changed");
  }
  for (double v : rows.data) {
    if (!std::isfinite(v)) throw NumericError("surrogate update: non-finite encoded value");
  }
  for (double v : attrs.phi) {
    if (!std::isfinite(v)) throw NumericError("surrogate update: non-finite attribution");
  }
  if (!frozen()) FreezeStandardization(rows);
  const std::size_t d = dim();
  const std::size_t m = attrs.cols();
  if (!fitted()) {
    features_ = attrs.features;
    gram_.assign(d * d, 0.0);
    rhs_.assign(m, std::vector<double>(d, 0.0));
  }

  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.rows), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.rows; ++i) {
    const std::vector<double> zi = Standardized(rows.row(i));
    for (std::size_t c = 0; c < d; ++c) {
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = zi[c];
    }
  }
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(rows.rows), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < rows.rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = attrs.at(i, j);
    }
  }
  const Eigen::MatrixXd ztz = z.transpose() * z;
  const Eigen::MatrixXd ztphi = z.transpose() * phi;
  const double g = params_.forgetting;
  // Upper triangle mirrored so the Gram matrix stays exactly symmetric.
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = r; c < d; ++c) {
      const double v = g * gram_[r * d + c] +
                       ztz(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      gram_[r * d + c] = v;
      gram_[c * d + r] = v;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t r = 0; r < d; ++r) {
      rhs_[j][r] = g * rhs_[j][r] +
                   ztphi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    }
  }
  ++updates_;
  Solve();
}

void RidgeSurrogate::Solve() {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      a(r, c) = gram_[static_cast<std::size_t>(r * d + c)];
    }
    a(r, r) += params_.penalty;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericError("surrogate: system is not positive definite; raise the penalty");
  }
  weights_.assign(rhs_.size(), {});
  for (std::size_t j = 0; j < rhs_.size(); ++j) {
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs_[j].data(), d);
    const Eigen::VectorXd w = llt.solve(b);
    weights_[j].assign(w.data(), w.data() + d);
  }
}

std::vector<double> RidgeSurrogate::Predict(std::span<const double> row) const {
  if (!fitted()) throw StateError("surrogate: not fitted");
  if (row.size() != mean_.size()) throw ShapeError("surrogate: row width mismatch");
  const std::vector<double> z = Standardized(row);
  std::vector<double> out(weights_.size(), 0.0);
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    double s = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) s += z[c] * weights_[j][c];
    out[j] = s;
  }
  return out;
}

nlohmann::ordered_json RidgeSurrogate::ToJson() const {
  nlohmann::ordered_json doc;
  doc["kind"] = "ridge_surrogate";
  doc["params"] = {{"forgetting", params_.forgetting},
                   {"penalty", params_.penalty},
                   {"trigger_cosine", params_.trigger_cosine},
                   {"blend", params_.blend}};
  doc["updates"] = updates_;
  doc["features"] = features_;
  doc["mean"] = mean_;
  doc["scale"] = scale_;
  const std::size_t d = frozen() ? dim() : 0;
  nlohmann::ordered_json gram = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < d && !gram_.empty(); ++r) {
    gram.push_back(std::vector<double>(gram_.begin() + static_cast<std::ptrdiff_t>(r * d),
                                       gram_.begin() + static_cast<std::ptrdiff_t>((r + 1) * d)));
  }
  doc["gram"] = gram;
  doc["rhs"] = rhs_;
  doc["weights"] = weights_;
  return doc;
}

RidgeSurrogate RidgeSurrogate::FromJson(const nlohmann::json& doc,
                                        const std::string& origin) {
  try {
    if (doc.at("kind").get<std::string>() != "ridge_surrogate") {
      throw ParseError(origin + ": not a ridge surrogate state");
    }
    SurrogateParams p;
    const auto& params = doc.at("params");
    p.forgetting = params.at("forgetting").get<double>();
    p.penalty = params.at("penalty").get<double>();
    p.trigger_cosine = params.at("trigger_cosine").get<double>();
    p.blend = params.at("blend").get<double>();
    RidgeSurrogate s(p);
    s.updates_ = doc.at("updates").get<int>();
    s.features_ = doc.at("features").get<std::vector<std::string>>();
    s.mean_ = doc.at("mean").get<std::vector<double>>();
    s.scale_ = doc.at("scale").get<std::vector<double>>();
    if (s.mean_.size() != s.scale_.size()) throw ParseError(origin + ": mean/scale length mismatch");
    const auto gram = doc.at("gram").get<std::vector<std::vector<double>>>();
    for (const auto& row : gram) {
      if (row.size() != s.dim()) throw ParseError(origin + ": gram row has wrong width");
      s.gram_.insert(s.gram_.end(), row.begin(), row.end());
    }
    s.rhs_ = doc.at("rhs").get<std::vector<std::vector<double>>>();
    s.weights_ = doc.at("weights").get<std::vector<std::vector<double>>>();
    if (s.updates_ > 0) {
      if (gram.size() != s.dim() || s.rhs_.size() != s.features_.size() ||
          s.weights_.size() != s.features_.size()) {
        throw ParseError(origin + ": inconsistent surrogate dimensions");
      }
      for (const auto& w : s.weights_) {
        if (w.size() != s.dim()) throw ParseError(origin + ": weight vector has wrong width");
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

Recalibration MethodCRecalibrate(const RidgeSurrogate& surrogate,
                                 const AttributionMatrix& raw,
                                 const EncodedMatrix& rows) {
  if (!surrogate.fitted()) {
    throw StateError("method C: surrogate has not been updated on a prior year");
  }
  if (raw.features != surrogate.features()) {
    throw ShapeError("method C: attribution features differ from the surrogate's");
  }
  if (raw.rows() != rows.rows) throw ShapeError("method C: attribution/encoded row mismatch");
  if (raw.rows() == 0) throw InputError("method C: no attribution rows");

  AttributionMatrix fitted = raw;
  for (std::size_t i = 0; i < rows.rows; ++i) {
    const std::vector<double> p = surrogate.Predict(rows.row(i));
    std::copy(p.begin(), p.end(),
              fitted.phi.begin() + static_cast<std::ptrdiff_t>(i * raw.cols()));
  }
  const ImportanceVector raw_imp = MeanAbsImportance(raw);
  const ImportanceVector fit_imp = MeanAbsImportance(fitted);

  Recalibration out;
  out.attrs = raw;
  out.attrs.method = "C";
  const CosineResult c = CosineSimilarity(raw_imp.values, fit_imp.values);
  out.cosine = c.value;
  out.triggered = out.cosine < surrogate.params().trigger_cosine;
  if (out.triggered) {
    const double a = surrogate.params().blend;
    for (std::size_t k = 0; k < out.attrs.phi.size(); ++k) {
      out.attrs.phi[k] = (1.0 - a) * raw.phi[k] + a * fitted.phi[k];
    }
  }
  return out;
}

}  // namespace driftscope
