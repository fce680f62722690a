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

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "driftscope/forest.hpp"
#include "driftscope/gbdt.hpp"
#include "driftscope/logistic.hpp"
#include "driftscope/metrics.hpp"
#include "driftscope/panel.hpp"

namespace driftscope {

enum class ModelKind { kGbdt, kLogistic, kForest };

std::string ModelKindName(ModelKind kind);
// Throws ConfigError for unknown names.
ModelKind ParseModelKind(const std::string& name);

struct ModelParams {
  GbdtParams gbdt;
  LogisticParams logistic;
  ForestParams forest;
  bool include_sensitive = false;
};

std::unique_ptr<Predictor> FitModel(ModelKind kind, const EncodedMatrix& train,
                                    std::span<const int> labels,
                                    const ModelParams& params);

struct WindowModel {
  int test_year = 0;
  std::vector<int> train_years;
  // (year, row) of every training record, for leak checks.
  std::vector<std::pair<int, int>> train_keys;
  std::shared_ptr<const Predictor> model;
};

// One model per year after the first, trained on every earlier year.
// Throws InputError for a panel with fewer than two years.
std::vector<WindowModel> ExpandingWindowTrain(const Panel& panel, ModelKind kind,
                                              const ModelParams& params);

std::vector<int> Labels(std::span<const LoanRecord> records);

}  // namespace driftscope
