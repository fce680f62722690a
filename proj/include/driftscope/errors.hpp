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

#include <stdexcept>
#include <string>

namespace driftscope {

// Base of every error raised by the toolkit. The kind string is stable and
// is used by the CLI to pick an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DRIFTSCOPE_DEFINE_ERROR(Name, Kind)                         \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(Kind, what) {}   \
  }

DRIFTSCOPE_DEFINE_ERROR(ConfigError, "config");
DRIFTSCOPE_DEFINE_ERROR(InputError, "input");
DRIFTSCOPE_DEFINE_ERROR(ShapeError, "shape");
DRIFTSCOPE_DEFINE_ERROR(DegenerateError, "degenerate");
DRIFTSCOPE_DEFINE_ERROR(NumericError, "numeric");
DRIFTSCOPE_DEFINE_ERROR(ConvergenceError, "convergence");
DRIFTSCOPE_DEFINE_ERROR(CalibrationError, "calibration");
DRIFTSCOPE_DEFINE_ERROR(EncodingError, "encoding");
DRIFTSCOPE_DEFINE_ERROR(StateError, "state");
DRIFTSCOPE_DEFINE_ERROR(ParseError, "parse");
DRIFTSCOPE_DEFINE_ERROR(StageError, "stage");

#undef DRIFTSCOPE_DEFINE_ERROR

}  // namespace driftscope
