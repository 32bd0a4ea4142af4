// Copyright 2026 The wkm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wkm {

enum class ErrorCode {
  // data model / csv
  EmptyDataset,
  InconsistentCovariateLength,
  NonBinaryIndicator,
  NegativeTime,
  TiedFailureTimes,
  MissingInterceptColumn,
  FileNotFound,
  ParseError,
  // propensity
  Separation,
  SingularInformation,
  MaxIterationsExceeded,
  NonFiniteWeight,
  // km / variance
  EmptyArm,
  DegenerateRiskSet,
  UndefinedBeyondLastRisk,
  TimeBeyondRiskSupport,
  InsufficientSample,
  InvalidLevel,
  // cli / simulation
  SchemaMismatch,
  InvalidArgument,
  TooManyFailures,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type for every recoverable failure raised by the library. The
/// code is stable and is what callers (and the CLI) dispatch on; the message
/// carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wkm
