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

#include "driftscope/panel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "driftscope/csv.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/rng.hpp"

namespace driftscope {
namespace {

// Stream ids inside a (seed, year, row) key.
constexpr std::uint64_t kFeatureStream = 1;
constexpr std::uint64_t kLabelStream = 2;
constexpr std::uint64_t kEmploymentStream = 3;

constexpr double kRaceShares[] = {0.55, 0.20, 0.15, 0.10};
// Log-income location offsets per race level, in units of the base income
// scale, centred so the share-weighted mean is zero. Multiplied by
// proxy_strength.
constexpr double kRaceIncomeOffset[] = {0.33, -0.77, -0.37, 0.28};
constexpr double kRegionShares[] = {0.18, 0.21, 0.38, 0.23};
constexpr double kFemaleShare = 0.52;
// Self-employed share among the employed population; gig work swells in
// recessions.
constexpr double kSelfEmployedShare = 0.10;
constexpr double kRecessionSelfEmployedShare = 0.35;

constexpr double kIncomeLogMean = 10.86;  // ~52k
constexpr double kIncomeLogScale = 0.30;
constexpr double kRecessionScaleWidening = 1.3;
constexpr double kScoreMean = 690.0;
constexpr double kScoreSd = 55.0;
// Credit-score offsets reuse the race income offsets, in score sd units.
constexpr double kRaceScoreCoupling = 2.0;
constexpr double kLoanLogMean = 9.6;  // ~15k
constexpr double kLoanLogScale = 0.5;
constexpr double kLoanIncomeCorrelation = 0.5;

// Latent design column order (matches Encode on the model features).
enum LatentColumn : std::size_t {
  kLatIncome = 0,
  kLatScore,
  kLatAge,
  kLatUnemployed,
  kLatSelfEmployed,
  kLatEmploymentLength,
  kLatDti,
  kLatLoan,
  kLatUtilization,
  kLatOpenAccounts,
  kLatDelinquencies,
  kLatTerm,
  kLatRegionMidwest,
  kLatRegionSouth,
  kLatRegionWest,
};

constexpr double kBaseWeights[kLatentDim] = {
    -0.26,  // income
    -0.30,  // credit score
    -0.09,  // age
    0.55,   // unemployed
    0.13,   // self employed
    -0.12,  // employment length
    0.34,   // dti
    0.39,   // loan amount
    0.19,   // utilization
    0.02,   // open accounts
    0.26,   // delinquencies
    0.15,   // 60-month term
    0.00,   // midwest
    0.02,   // south
    -0.02,  // west
};

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Quantize(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

int DrawCategory(CounterRng& rng, std::span<const double> shares) {
  const double u = rng.Uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < shares.size(); ++i) {
    acc += shares[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(shares.size() - 1);
}

bool IsProbability(double p) { return p > 0.0 && p < 1.0; }

}  // namespace

bool GeneratorConfig::is_recession(int year) const {
  return std::find(recession_years.begin(), recession_years.end(), year) !=
         recession_years.end();
}

double GeneratorConfig::target_default_rate(int year) const {
  const auto it = std::find(years.begin(), years.end(), year);
  if (it == years.end()) throw InputError("year " + std::to_string(year) + " not configured");
  if (years.size() == 1) return base_default_rate;
  const double t = static_cast<double>(it - years.begin()) /
                   static_cast<double>(years.size() - 1);
  return base_default_rate + t * (final_default_rate - base_default_rate);
}

double GeneratorConfig::unemployment_rate(int year) const {
  return is_recession(year) ? recession_unemployment : base_unemployment;
}

void GeneratorConfig::Validate() const {
  if (years.empty()) throw ConfigError("generator.years: must not be empty");
  for (std::size_t i = 1; i < years.size(); ++i) {
    if (years[i] <= years[i - 1]) {
      throw ConfigError("generator.years: must be strictly ascending");
    }
  }
  if (rows_per_year < 50) {
    throw ConfigError("generator.rows_per_year: must be >= 50, got " +
                      std::to_string(rows_per_year));
  }
  const std::pair<const char*, double> probs[] = {
      {"base_default_rate", base_default_rate},
      {"final_default_rate", final_default_rate},
      {"base_unemployment", base_unemployment},
      {"recession_unemployment", recession_unemployment},
  };
  for (const auto& [name, p] : probs) {
    if (!IsProbability(p)) {
      throw ConfigError(std::string("generator.") + name +
                        ": must lie in (0, 1)");
    }
  }
  if (final_default_rate < base_default_rate) {
    throw ConfigError(
        "generator.final_default_rate: must be >= base_default_rate");
  }
  if (!(proxy_strength >= 0.0) || !std::isfinite(proxy_strength)) {
    throw ConfigError("generator.proxy_strength: must be a finite value >= 0");
  }
  if (!std::isfinite(income_drift_per_year) ||
      !std::isfinite(score_drift_per_year)) {
    throw ConfigError("generator.income_drift_per_year/score_drift_per_year: "
                      "must be finite");
  }
  if (!coefficient_schedule.empty()) {
    for (int y : years) {
      const auto it = coefficient_schedule.find(y);
      if (it == coefficient_schedule.end()) {
        throw ConfigError("generator.coefficient_schedule: missing year " +
                          std::to_string(y));
      }
      if (it->second.size() != kLatentDim) {
        throw ConfigError("generator.coefficient_schedule: year " +
                          std::to_string(y) + " needs " +
                          std::to_string(kLatentDim) + " weights");
      }
    }
  }
}

std::map<int, std::vector<double>> DefaultCoefficientSchedule(
    const GeneratorConfig& config) {
  std::map<int, std::vector<double>> out;
  for (int y : config.years) {
    std::vector<double> w(std::begin(kBaseWeights), std::end(kBaseWeights));
    if (config.is_recession(y)) {
      w[kLatUnemployed] *= 2.0;
      w[kLatIncome] *= 1.5;
    }
    out.emplace(y, std::move(w));
  }
  return out;
}

double YearSlice::default_rate() const {
  if (records.empty()) return 0.0;
  double positives = 0.0;
  for (const LoanRecord& r : records) positives += r.label;
  return positives / static_cast<double>(records.size());
}

Panel::Panel(Schema schema, std::vector<YearSlice> slices)
    : schema_(std::move(schema)), slices_(std::move(slices)) {}

std::vector<int> Panel::years() const {
  std::vector<int> out;
  out.reserve(slices_.size());
  for (const YearSlice& s : slices_) out.push_back(s.year);
  return out;
}

const YearSlice& Panel::Slice(int year) const {
  for (const YearSlice& s : slices_) {
    if (s.year == year) return s;
  }
  throw InputError("panel has no year " + std::to_string(year));
}

std::vector<LoanRecord> Panel::RecordsBefore(int year) const {
  std::vector<LoanRecord> out;
  for (const YearSlice& s : slices_) {
    if (s.year < year) out.insert(out.end(), s.records.begin(), s.records.end());
  }
  return out;
}

std::size_t Panel::total_records() const {
  std::size_t n = 0;
  for (const YearSlice& s : slices_) n += s.records.size();
  return n;
}

double LatentDefaultProb(std::span<const double> features,
                         std::span<const double> coeffs) {
  if (coeffs.size() != features.size() + 1) {
    throw ShapeError("latent coefficients have " +
                     std::to_string(coeffs.size()) + " entries, expected " +
                     std::to_string(features.size() + 1));
  }
  double z = coeffs[0];
  for (std::size_t i = 0; i < features.size(); ++i) z += coeffs[i + 1] * features[i];
  return Sigmoid(z);
}

double CalibrateIntercept(double target_rate, std::span<const double> scores) {
  if (!IsProbability(target_rate)) {
    throw CalibrationError("target rate must lie in (0, 1)");
  }
  if (scores.empty()) throw CalibrationError("no scores to calibrate on");
  auto mean_rate = [&](double c) {
    double s = 0.0;
    for (double z : scores) s += Sigmoid(z + c);
    return s / static_cast<double>(scores.size());
  };
  double lo = -30.0;
  double hi = 30.0;
  if (mean_rate(lo) > target_rate || mean_rate(hi) < target_rate) {
    throw CalibrationError("target rate unreachable with intercept in [-30, 30]");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_rate(mid) < target_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> LatentDesign(const LoanRecord& r) {
  std::vector<double> x(kLatentDim, 0.0);
  x[kLatIncome] = (std::log(r[kAnnualIncome]) - kIncomeLogMean) / kIncomeLogScale;
  x[kLatScore] = (r[kCreditScore] - kScoreMean) / kScoreSd;
  x[kLatAge] = (r[kAge] - 46.5) / 16.5;
  x[kLatUnemployed] = r.level(kEmploymentStatus) == kUnemployed ? 1.0 : 0.0;
  x[kLatSelfEmployed] = r.level(kEmploymentStatus) == kSelfEmployed ? 1.0 : 0.0;
  x[kLatEmploymentLength] = (r[kEmploymentLength] - 6.0) / 6.0;
  x[kLatDti] = (r[kDti] - 0.2) / 0.1;
  x[kLatLoan] = (std::log(r[kLoanAmount]) - kLoanLogMean) / kLoanLogScale;
  x[kLatUtilization] = (r[kCreditUtilization] - 0.4) / 0.2;
  x[kLatOpenAccounts] = (r[kNumOpenAccounts] - 8.0) / 2.83;
  x[kLatDelinquencies] = r[kDelinquencies2y];
  x[kLatTerm] = r[kLoanTermMonths] >= 60.0 ? 1.0 : 0.0;
  const int region = r.level(kRegion);
  if (region > 0) x[kLatRegionMidwest + static_cast<std::size_t>(region - 1)] = 1.0;
  return x;
}

Panel GeneratePanel(const GeneratorConfig& config) {
  config.Validate();
  const Schema& schema = Schema::Lending();
  const auto schedule = config.coefficient_schedule.empty()
                            ? DefaultCoefficientSchedule(config)
                            : config.coefficient_schedule;
  const auto n = static_cast<std::size_t>(config.rows_per_year);

  auto clip = [&](std::size_t f, double v) {
    const FeatureSpec& spec = schema.feature(f);
    return Quantize(std::clamp(v, spec.lower, spec.upper), spec.decimals);
  };

  std::vector<YearSlice> slices;
  for (std::size_t yi = 0; yi < config.years.size(); ++yi) {
    const int year = config.years[yi];
    const bool recession = config.is_recession(year);
    const double t = static_cast<double>(yi);

    // Exactly round(rate * n) unemployed rows: the ones with the smallest
    // keyed hash. Order-free and exact, so the share never wobbles.
    std::vector<std::pair<std::uint64_t, std::size_t>> keys(n);
    for (std::size_t r = 0; r < n; ++r) {
      keys[r] = {StreamKey({config.seed, static_cast<std::uint64_t>(year), r,
                            kEmploymentStream}),
                 r};
    }
    std::sort(keys.begin(), keys.end());
    const auto unemployed_count = static_cast<std::size_t>(
        std::llround(config.unemployment_rate(year) * static_cast<double>(n)));
    std::vector<char> unemployed(n, 0);
    for (std::size_t i = 0; i < unemployed_count; ++i) unemployed[keys[i].second] = 1;

    YearSlice slice;
    slice.year = year;
    slice.records.resize(n);
    ParallelFor(n, [&](std::size_t r) {
      CounterRng rng({config.seed, static_cast<std::uint64_t>(year), r,
                      kFeatureStream});
      LoanRecord& rec = slice.records[r];
      rec.year = year;
      rec.row = static_cast<int>(r);

      const int race = DrawCategory(rng, kRaceShares);
      rec[kRace] = race;
      rec[kGender] = rng.Uniform() < kFemaleShare ? 0 : 1;
      rec[kRegion] = DrawCategory(rng, kRegionShares);
      int employment = kEmployed;
      const double u_self = rng.Uniform();
      if (unemployed[r]) {
        employment = kUnemployed;
      } else if (u_self < (recession ? kRecessionSelfEmployedShare
                                       : kSelfEmployedShare)) {
        employment = kSelfEmployed;
      }
      rec[kEmploymentStatus] = employment;

      const double z_income = rng.Normal();
      const double income_scale =
          kIncomeLogScale * (recession ? kRecessionScaleWidening : 1.0);
      const double log_income =
          kIncomeLogMean + config.income_drift_per_year * t +
          config.proxy_strength * kRaceIncomeOffset[race] * kIncomeLogScale +
          income_scale * z_income;
      rec[kAnnualIncome] = clip(kAnnualIncome, std::exp(log_income));

      rec[kCreditScore] = clip(
          kCreditScore,
          rng.Normal(kScoreMean + config.score_drift_per_year * t +
                         config.proxy_strength * kRaceIncomeOffset[race] *
                             kRaceScoreCoupling * kScoreSd,
                     kScoreSd));
      rec[kAge] = static_cast<double>(18 + rng.Below(58));

      const double tenure = rng.Exponential(6.0);
      rec[kEmploymentLength] =
          employment == kUnemployed
              ? 0.0
              : clip(kEmploymentLength, std::min(tenure, rec[kAge] - 16.0));

      const double dti = 0.8 * rng.BetaInt(2, 6) + (recession ? 0.05 : 0.0);
      rec[kDti] = Quantize(std::clamp(dti, 0.0, 0.8), schema.feature(kDti).decimals);

      const double log_loan =
          kLoanLogMean +
          kLoanLogScale * (kLoanIncomeCorrelation * z_income +
                           std::sqrt(1.0 - kLoanIncomeCorrelation *
                                               kLoanIncomeCorrelation) *
                               rng.Normal());
      rec[kLoanAmount] = clip(kLoanAmount, std::exp(log_loan));
      rec[kCreditUtilization] = clip(
          kCreditUtilization, rng.BetaInt(2, 3) + (recession ? 0.03 : 0.0));
      rec[kNumOpenAccounts] = clip(kNumOpenAccounts, rng.Poisson(8.0));
      rec[kDelinquencies2y] =
          clip(kDelinquencies2y, rng.Poisson(recession ? 0.45 : 0.3));
      rec[kLoanTermMonths] = rng.Uniform() < 0.3 ? 60.0 : 36.0;
    });

    // Label model: yearly weights, intercept calibrated to the target path.
    const std::vector<double>& weights = schedule.at(year);
    std::vector<double> scores(n);
    ParallelFor(n, [&](std::size_t r) {
      const std::vector<double> x = LatentDesign(slice.records[r]);
      scores[r] = std::inner_product(x.begin(), x.end(), weights.begin(), 0.0);
    });
    const double intercept =
        CalibrateIntercept(config.target_default_rate(year), scores);
    ParallelFor(n, [&](std::size_t r) {
      CounterRng rng({config.seed, static_cast<std::uint64_t>(year), r,
                      kLabelStream});
      slice.records[r].label = rng.Uniform() < Sigmoid(scores[r] + intercept);
    });
    slices.push_back(std::move(slice));
  }
  return Panel(schema, std::move(slices));
}

std::string PanelToCsv(const Panel& panel) {
  const Schema& schema = panel.schema();
  std::vector<std::string> header = {"year", "row"};
  for (const FeatureSpec& f : schema.features()) header.push_back(f.name);
  header.push_back("default");
  CsvWriter out(std::move(header));
  for (const YearSlice& s : panel.slices()) {
    for (const LoanRecord& r : s.records) {
      std::vector<std::string> fields = {std::to_string(r.year),
                                         std::to_string(r.row)};
      for (std::size_t f = 0; f < schema.size(); ++f) {
        const FeatureSpec& spec = schema.feature(f);
        if (spec.is_categorical()) {
          fields.push_back(spec.levels.at(static_cast<std::size_t>(r.level(f))));
        } else {
          fields.push_back(FormatFixed(r[f], spec.decimals));
        }
      }
      fields.push_back(std::to_string(r.label));
      out.Row(std::move(fields));
    }
  }
  return out.str();
}

Panel PanelFromCsv(std::string_view text, const std::string& origin) {
  const Schema& schema = Schema::Lending();
  const CsvTable table = ParseCsv(text, origin);
  const std::size_t year_col = table.Column("year");
  const std::size_t row_col = table.Column("row");
  const std::size_t label_col = table.Column("default");
  std::vector<std::size_t> cols(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    cols[f] = table.Column(schema.feature(f).name);
  }
  std::vector<YearSlice> slices;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    LoanRecord rec;
    rec.year = static_cast<int>(table.Integer(i, year_col));
    rec.row = static_cast<int>(table.Integer(i, row_col));
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const FeatureSpec& spec = schema.feature(f);
      if (spec.is_categorical()) {
        rec[f] = schema.LevelIndex(f, table.rows[i][cols[f]]);
      } else {
        rec[f] = table.Number(i, cols[f]);
      }
    }
    rec.label = static_cast<int>(table.Integer(i, label_col));
    if (slices.empty() || slices.back().year != rec.year) {
      if (!slices.empty() && rec.year < slices.back().year) {
        throw ParseError(origin + ":" + std::to_string(i + 2) +
                         ": years must be ascending");
      }
      slices.push_back(YearSlice{rec.year, {}});
    }
    slices.back().records.push_back(rec);
  }
  return Panel(schema, std::move(slices));
}

}  // namespace driftscope
