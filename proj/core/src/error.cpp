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

#include "wkm/error.hpp"

namespace wkm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InconsistentCovariateLength: return "InconsistentCovariateLength";
    case ErrorCode::NonBinaryIndicator: return "NonBinaryIndicator";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::TiedFailureTimes: return "TiedFailureTimes";
    case ErrorCode::MissingInterceptColumn: return "MissingInterceptColumn";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Separation: return "Separation";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::NonFiniteWeight: return "NonFiniteWeight";
    case ErrorCode::EmptyArm: return "EmptyArm";
    case ErrorCode::DegenerateRiskSet: return "DegenerateRiskSet";
    case ErrorCode::UndefinedBeyondLastRisk: return "UndefinedBeyondLastRisk";
    case ErrorCode::TimeBeyondRiskSupport: return "TimeBeyondRiskSupport";
    case ErrorCode::InsufficientSample: return "InsufficientSample";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace wkm
