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

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wkm/data_model.hpp"

namespace wkm {

/// Weighted at-risk process Q(t) = (1/n) sum_i w_i 1{T_i >= t, X_i = k} and
/// failure process F(t) = (1/n) sum_i w_i 1{T_i <= t, delta_i = 1, X_i = k}
/// for one arm. Both are evaluated by binary search over sorted times.
struct WeightedProcesses {
  Arm arm = Arm::Treated;
  std::size_t n = 0;  // size of the full dataset, the common denominator

  std::vector<double> times;          // arm-k observed times, ascending
  std::vector<double> at_risk_suffix; // size times.size() + 1, trailing 0

  std::vector<double> event_times;    // arm-k failure times, ascending
  std::vector<double> event_weights;  // w_j at each failure time
  std::vector<double> event_at_risk;  // Q(T_j)
  std::vector<double> failure_prefix; // F(T_j)

  double at_risk(double t) const;
  double failures(double t) const;
  /// Largest time with positive weighted risk set.
  double domain_end() const { return times.back(); }
};

/// Throws EmptyArm when no subject received `arm`, InvalidArgument when
/// weights are not finite and positive or have the wrong length.
WeightedProcesses weighted_processes(const Dataset& data, std::span<const double> weights,
                                     Arm arm);
WeightedProcesses weighted_processes(const Dataset& data, const Eigen::VectorXd& weights,
                                     Arm arm);

/// Right-continuous survival step function. values[j] is the survival just
/// after knots[j]; the curve is 1 before the first knot.
struct SurvivalCurve {
  Arm arm = Arm::Treated;
  std::vector<double> knots;
  std::vector<double> values;
  double domain_end = 0.0;
};

/// Weighted product-limit estimator prod_{T_j <= t} [1 - w_j / (n Q(T_j))].
/// Throws DegenerateRiskSet if a factor is negative beyond rounding.
SurvivalCurve iptw_km(const WeightedProcesses& processes);

/// Throws UndefinedBeyondLastRisk for t > domain_end, InvalidArgument for t < 0.
double survival_at(const SurvivalCurve& curve, double t);

}  // namespace wkm
