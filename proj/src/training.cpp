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

#include "driftscope/training.hpp"

#include "driftscope/errors.hpp"
#include "driftscope/parallel.hpp"

namespace driftscope {

std::string ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGbdt:
      return "gbdt";
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kForest:
      return "forest";
  }
  return "unknown";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "gbdt") return ModelKind::kGbdt;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "forest") return ModelKind::kForest;
  throw ConfigError("unknown model kind '" + name + "'");
}

std::vector<int> Labels(std::span<const LoanRecord> records) {
  std::vector<int> y(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) y[i] = records[i].label;
  return y;
}

std::unique_ptr<Predictor> FitModel(ModelKind kind, const EncodedMatrix& train,
                                    std::span<const int> labels,
                                    const ModelParams& params) {
  switch (kind) {
    case ModelKind::kGbdt:
      return std::make_unique<GbdtModel>(FitGbdt(train, labels, params.gbdt));
    case ModelKind::kLogistic:
      return std::make_unique<LogisticModel>(
          FitLogistic(train, labels, params.logistic));
    case ModelKind::kForest:
      return std::make_unique<ForestModel>(
          FitRandomForest(train, labels, params.forest));
  }
  throw ConfigError("unknown model kind");
}

std::vector<WindowModel> ExpandingWindowTrain(const Panel& panel, ModelKind kind,
                                              const ModelParams& params) {
  const std::vector<int> years = panel.years();
  if (years.size() < 2) {
    throw InputError("expanding_window_train: need at least two years");
  }
  std::vector<WindowModel> out(years.size() - 1);
  // Windows are independent; each slot is written by exactly one task.
  ParallelFor(out.size(), [&](std::size_t k) {
    const int test_year = years[k + 1];
    WindowModel& wm = out[k];
    wm.test_year = test_year;
    wm.train_years.assign(years.begin(), years.begin() + static_cast<std::ptrdiff_t>(k + 1));
    const std::vector<LoanRecord> train = panel.RecordsBefore(test_year);
    wm.train_keys.reserve(train.size());
    for (const LoanRecord& r : train) wm.train_keys.emplace_back(r.year, r.row);
    const EncodedMatrix x = Encode(train, panel.schema(), params.include_sensitive);
    wm.model = FitModel(kind, x, Labels(train), params);
  });
  return out;
}

}  // namespace driftscope
