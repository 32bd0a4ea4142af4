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
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "wkm/data_model.hpp"
#include "wkm/km.hpp"
#include "wkm/propensity.hpp"

namespace wkm {

/// Per-subject influence quantities for the arm-k survival estimate at a
/// fixed time t. All vectors have one entry per subject in dataset order.
struct InfluenceTable {
  double t = 0.0;
  Arm arm = Arm::Treated;
  double survival = 1.0;  // S_k(t)

  // integral of Q_ik dF / Q^2 over [0, t]
  Eigen::VectorXd phi1;
  // 1{T_i <= t, delta_i = 1, X_i = k} / Q(T_i)
  Eigen::VectorXd phi2;
  // survival * (phi1 - phi2)
  Eigen::VectorXd phi;

  // Filled by psi_table.
  Eigen::VectorXd weighted_phi;  // w_i * phi_i
  Eigen::VectorXd correction;    // (1/n) sum_j dw_j/dgamma * phi_j
  Eigen::VectorXd psi;           // weighted_phi_i + zeta_i' correction
};

/// Computes phi1, phi2 and phi with prefix sums over the arm's failure
/// times. Throws TimeBeyondRiskSupport if Q_k(t) = 0 (t past the last
/// observed time of the arm).
InfluenceTable phi_components(const Dataset& data, const WeightedProcesses& processes,
                              const SurvivalCurve& curve, double t);

/// Adds the weight-estimation correction and completes psi.
InfluenceTable psi_table(const Dataset& data, const PropensityFit& fit,
                         const ScoreInfluence& influence, InfluenceTable table);

/// sqrt(sample variance / n), sample variance with denominator n - 1.
/// Throws InsufficientSample when fewer than two values are given.
double influence_se(std::span<const double> values);
double influence_se(const Eigen::VectorXd& values);

/// Standard error from the full influence values psi.
double se_proposed(const InfluenceTable& table);
/// Standard error treating the fitted propensity coefficients as known:
/// the correction term is dropped, leaving w_i * phi_i.
double se_gamma_fixed(const InfluenceTable& table);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// estimate -/+ z_{(1+level)/2} * se. Throws InvalidLevel unless 0 < level < 1.
Interval wald_ci(double estimate, double se, double level);

enum class Target { Control = 0, Treated = 1, Difference = 2 };

std::string_view to_string(Target target) noexcept;

struct VarianceReport {
  double t = 0.0;
  Target target = Target::Treated;
  double estimate = 0.0;
  double se_proposed = 0.0;
  double se_gamma_fixed = 0.0;
  double ci_level = 0.95;
  Interval ci;              // from se_proposed
  Interval ci_gamma_fixed;  // from se_gamma_fixed
};

VarianceReport arm_report(const InfluenceTable& table, double ci_level);

/// Treatment difference S_1(t) - S_0(t); standard errors come from the
/// per-subject contrasts psi_1 - psi_0 (and w phi_1 - w phi_0).
VarianceReport difference_report(const InfluenceTable& treated, const InfluenceTable& control,
                                 double ci_level);

/// Full estimation pipeline on one dataset: propensity fit, score influence
/// and the IPTW survival curve of every nonempty arm.
class IptwAnalysis {
 public:
  explicit IptwAnalysis(Dataset data, FitOptions options = {});

  const Dataset& data() const noexcept { return data_; }
  const PropensityFit& fit() const noexcept { return fit_; }
  const ScoreInfluence& influence() const noexcept { return influence_; }

  /// Throws EmptyArm if nobody received `arm`.
  const WeightedProcesses& processes(Arm arm) const;
  const SurvivalCurve& curve(Arm arm) const;

  InfluenceTable influence_table(double t, Arm arm) const;
  VarianceReport report(double t, Arm arm, double ci_level = 0.95) const;
  VarianceReport difference(double t, double ci_level = 0.95) const;

 private:
  Dataset data_;
  PropensityFit fit_;
  ScoreInfluence influence_;
  std::array<std::optional<WeightedProcesses>, 2> processes_;
  std::array<std::optional<SurvivalCurve>, 2> curves_;
};

}  // namespace wkm
