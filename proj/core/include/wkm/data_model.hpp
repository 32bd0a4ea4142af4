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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace wkm {

/// Potential-outcome arm: 1 = treated, 0 = control.
enum class Arm : int { Control = 0, Treated = 1 };

constexpr int arm_index(Arm arm) noexcept { return static_cast<int>(arm); }

/// One subject's observation (T, delta, X, Z). `covariates[0]` is the
/// intercept and must be exactly 1.
struct SubjectRecord {
  double time = 0.0;
  int event = 0;
  int treatment = 0;
  std::vector<double> covariates;

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

struct ValidationOptions {
  // Break tied failure times by adding rank * 1e-9 * max(time) within each
  // tie group instead of rejecting the dataset.
  bool jitter_ties = false;
};

/// Validated, immutable survival dataset.
///
/// Invariants: n >= 1, all covariate vectors share length p >= 1 with a
/// leading 1, indicators are binary, times are finite and nonnegative, and no
/// two failures share a time. A censoring at the same time as a failure is
/// treated as still at risk at the failure.
class Dataset {
 public:
  /// Throws wkm::Error (EmptyDataset, InconsistentCovariateLength,
  /// NonBinaryIndicator, NegativeTime, TiedFailureTimes,
  /// MissingInterceptColumn).
  static Dataset validate(std::vector<SubjectRecord> records,
                          ValidationOptions options = {});

  std::size_t n() const noexcept { return records_.size(); }
  std::size_t p() const noexcept { return p_; }
  std::span<const SubjectRecord> records() const noexcept { return records_; }
  const SubjectRecord& operator[](std::size_t i) const { return records_[i]; }

  std::size_t arm_size(Arm arm) const noexcept { return arm_sizes_[arm_index(arm)]; }
  std::size_t event_count(Arm arm) const noexcept { return event_counts_[arm_index(arm)]; }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.records_ == b.records_;
  }

 private:
  Dataset() = default;

  std::vector<SubjectRecord> records_;
  std::size_t p_ = 0;
  std::array<std::size_t, 2> arm_sizes_{};
  std::array<std::size_t, 2> event_counts_{};
};

}  // namespace wkm
