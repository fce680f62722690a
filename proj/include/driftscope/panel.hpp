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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "driftscope/schema.hpp"

namespace driftscope {

// Width of the latent label model's design row: the 15 one-hot model
// columns (same order as Encode() on the model features).
inline constexpr std::size_t kLatentDim = 15;

struct GeneratorConfig {
  std::uint64_t seed = 20240917;
  std::vector<int> years = {2015, 2016, 2017, 2018, 2019,
                            2020, 2021, 2022, 2023, 2024};
  int rows_per_year = 2000;
  double base_default_rate = 0.15;
  double final_default_rate = 0.23;
  std::vector<int> recession_years = {2020, 2021};
  double base_unemployment = 0.05;
  double recession_unemployment = 0.15;
  double income_drift_per_year = 0.03;
  double score_drift_per_year = -2.0;
  double proxy_strength = 0.4;
  // Latent logistic weights per year (kLatentDim entries, no intercept; the
  // intercept is calibrated per year). Empty means the default schedule.
  std::map<int, std::vector<double>> coefficient_schedule;

  bool is_recession(int year) const;
  // Linear interpolation of the default-rate path over the year list.
  double target_default_rate(int year) const;
  double unemployment_rate(int year) const;

  // Throws ConfigError naming the offending field.
  void Validate() const;
};

// Base weights over the latent design plus the recession adjustments
// (unemployed x2, income x1.5), for every configured year.
std::map<int, std::vector<double>> DefaultCoefficientSchedule(
    const GeneratorConfig& config);

struct YearSlice {
  int year = 0;
  std::vector<LoanRecord> records;

  double default_rate() const;
};

class Panel {
 public:
  Panel() = default;
  Panel(Schema schema, std::vector<YearSlice> slices);

  const Schema& schema() const { return schema_; }
  const std::vector<YearSlice>& slices() const { return slices_; }
  std::vector<int> years() const;
  // Throws InputError when the year is absent.
  const YearSlice& Slice(int year) const;
  // All records with year < `year`, in (year, row) order.
  std::vector<LoanRecord> RecordsBefore(int year) const;
  std::size_t total_records() const;

 private:
  Schema schema_ = Schema::Lending();
  std::vector<YearSlice> slices_;
};

Panel GeneratePanel(const GeneratorConfig& config);

// sigmoid(coeffs[0] + <coeffs[1..], features>). Throws ShapeError unless
// coeffs.size() == features.size() + 1.
double LatentDefaultProb(std::span<const double> features,
                         std::span<const double> coeffs);

// Intercept c with mean(sigmoid(score + c)) == target_rate (to 1e-6) by
// bisection on [-30, 30]. Throws CalibrationError when out of reach.
double CalibrateIntercept(double target_rate, std::span<const double> scores);

// Latent design row (centred and scaled by fixed reference constants).
std::vector<double> LatentDesign(const LoanRecord& record);

// panel.csv: year,row,<features in schema order>,default.
std::string PanelToCsv(const Panel& panel);
Panel PanelFromCsv(std::string_view text, const std::string& origin);

}  // namespace driftscope
