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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "driftscope/model.hpp"
#include "driftscope/schema.hpp"
#include "driftscope/shapley.hpp"

namespace driftscope {

enum class PerturbationKind { kMultiplicative, kLevelFlip };

struct PerturbationSpec {
  std::string feature;
  PerturbationKind kind = PerturbationKind::kMultiplicative;
  double magnitude = 0.0;  // multiplicative: value * (1 + magnitude)
  std::string level;       // level flip target

  // Throws InputError naming the problem.
  void Validate(const Schema& schema) const;
  std::string direction() const;  // "+10%", "-10%", "->unemployed"
};

struct CounterfactualResult {
  PerturbationSpec spec;
  double mean_delta = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
  std::vector<double> deltas;  // per perturbed instance, input order
  std::size_t skipped = 0;     // level flips already at the target level
};

// mean_i [f(perturb(x_i)) - f(x_i)]. Numeric perturbations are clipped to
// the schema bounds; level flips skip records already at the target.
CounterfactualResult CounterfactualSweep(const Predictor& model,
                                         std::span<const LoanRecord> records,
                                         const Schema& schema,
                                         const PerturbationSpec& spec);

struct SensitivityCurve {
  std::string method;
  std::vector<std::size_t> sizes;
  std::vector<double> cosines;  // vs the largest size

  // Trapezoid area of (1 - cosine) over log2(size).
  double area() const;
};

// Draws a background of the given size under some policy.
using BackgroundDraw = std::function<BackgroundSet(std::size_t size)>;

// Importance over a fixed instance set for each background size, compared
// with the largest size. Sizes must be ascending and distinct.
SensitivityCurve BackgroundSizeSensitivity(const Predictor& model,
                                           std::span<const LoanRecord> instances,
                                           const Schema& schema,
                                           const std::string& method,
                                           const std::vector<std::size_t>& sizes,
                                           const BackgroundDraw& draw,
                                           const ExplainOptions& options = {});

}  // namespace driftscope
