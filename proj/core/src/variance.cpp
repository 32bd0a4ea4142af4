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

#include "wkm/variance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wkm/csv.hpp"
#include "wkm/error.hpp"
#include "wkm/normal.hpp"

namespace wkm {
namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void require_psi(const InfluenceTable& table) {
  if (table.psi.size() == 0 || table.weighted_phi.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "influence table has no psi values; run psi_table");
  }
}

}  // namespace

InfluenceTable phi_components(const Dataset& data, const WeightedProcesses& processes,
                              const SurvivalCurve& curve, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "evaluation time must be >= 0");
  if (t > processes.domain_end()) {
    throw Error(ErrorCode::TimeBeyondRiskSupport,
                "time " + format_exact(t) + " has an empty risk set in arm " +
                    std::to_string(arm_index(processes.arm)) + " (last time " +
                    format_exact(processes.domain_end()) + ")");
  }

  const auto n = static_cast<Eigen::Index>(data.n());
  const double nd = static_cast<double>(data.n());
  const int k = arm_index(processes.arm);

  // prefix[j] = sum_{l <= j} (w_l / n) / Q(T_l)^2 over the arm's failures
  const auto& event_times = processes.event_times;
  std::vector<double> prefix(event_times.size());
  double running = 0.0;
  for (std::size_t j = 0; j < event_times.size(); ++j) {
    const double q = processes.event_at_risk[j];
    running += (processes.event_weights[j] / nd) / (q * q);
    prefix[j] = running;
  }

  InfluenceTable table;
  table.t = t;
  table.arm = processes.arm;
  table.survival = survival_at(curve, t);
  table.phi1 = Eigen::VectorXd::Zero(n);
  table.phi2 = Eigen::VectorXd::Zero(n);
  table.phi = Eigen::VectorXd::Zero(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = data[static_cast<std::size_t>(i)];
    if (r.treatment != k) continue;
    const double cut = std::min(t, r.time);
    const auto it = std::upper_bound(event_times.begin(), event_times.end(), cut);
    if (it != event_times.begin()) {
      table.phi1[i] = prefix[static_cast<std::size_t>(it - event_times.begin()) - 1];
    }
    if (r.event == 1 && r.time <= t) table.phi2[i] = 1.0 / processes.at_risk(r.time);
    table.phi[i] = table.survival * (table.phi1[i] - table.phi2[i]);
  }
  return table;
}

InfluenceTable psi_table(const Dataset& data, const PropensityFit& fit,
                         const ScoreInfluence& influence, InfluenceTable table) {
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto p = static_cast<Eigen::Index>(data.p());
  if (table.phi.size() != n || fit.weights.size() != n || influence.zeta.rows() != n) {
    throw Error(ErrorCode::InvalidArgument, "inputs derived from different datasets");
  }

  table.weighted_phi = fit.weights.cwiseProduct(table.phi);
  table.correction = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (table.phi[j] == 0.0) continue;
    table.correction += weight_gradient(fit.gamma_hat, data[static_cast<std::size_t>(j)]) *
                        table.phi[j];
  }
  table.correction /= static_cast<double>(n);
  table.psi = table.weighted_phi + influence.zeta * table.correction;
  return table;
}

double influence_se(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) {
    throw Error(ErrorCode::InsufficientSample, "standard error needs at least two subjects");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double variance = ss / static_cast<double>(n - 1);
  return std::sqrt(variance / static_cast<double>(n));
}

double influence_se(const Eigen::VectorXd& values) { return influence_se(as_span(values)); }

double se_proposed(const InfluenceTable& table) {
  require_psi(table);
  return influence_se(table.psi);
}

double se_gamma_fixed(const InfluenceTable& table) {
  require_psi(table);
  return influence_se(table.weighted_phi);
}

Interval wald_ci(double estimate, double se, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidLevel, "confidence level must lie in (0, 1)");
  }
  if (!(se >= 0.0)) throw Error(ErrorCode::InvalidArgument, "standard error must be >= 0");
  const double half = normal_quantile(0.5 * (1.0 + level)) * se;
  return {estimate - half, estimate + half};
}

std::string_view to_string(Target target) noexcept {
  switch (target) {
    case Target::Control: return "0";
    case Target::Treated: return "1";
    case Target::Difference: return "diff";
  }
  return "?";
}

VarianceReport arm_report(const InfluenceTable& table, double ci_level) {
  VarianceReport report;
  report.t = table.t;
  report.target = table.arm == Arm::Treated ? Target::Treated : Target::Control;
  report.estimate = table.survival;
  report.se_proposed = se_proposed(table);
  report.se_gamma_fixed = se_gamma_fixed(table);
  report.ci_level = ci_level;
  report.ci = wald_ci(report.estimate, report.se_proposed, ci_level);
  report.ci_gamma_fixed = wald_ci(report.estimate, report.se_gamma_fixed, ci_level);
  return report;
}

VarianceReport difference_report(const InfluenceTable& treated, const InfluenceTable& control,
                                 double ci_level) {
  require_psi(treated);
  require_psi(control);
  if (treated.arm != Arm::Treated || control.arm != Arm::Control || treated.t != control.t ||
      treated.psi.size() != control.psi.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "difference needs treated and control tables at the same time");
  }
  VarianceReport report;
  report.t = treated.t;
  report.target = Target::Difference;
  report.estimate = treated.survival - control.survival;
  report.se_proposed = influence_se(Eigen::VectorXd(treated.psi - control.psi));
  report.se_gamma_fixed =
      influence_se(Eigen::VectorXd(treated.weighted_phi - control.weighted_phi));
  report.ci_level = ci_level;
  report.ci = wald_ci(report.estimate, report.se_proposed, ci_level);
  report.ci_gamma_fixed = wald_ci(report.estimate, report.se_gamma_fixed, ci_level);
  return report;
}

IptwAnalysis::IptwAnalysis(Dataset data, FitOptions options)
    : data_(std::move(data)),
      fit_(fit_logistic(data_, options)),
      influence_(score_influence(fit_, data_)) {
  for (Arm arm : {Arm::Control, Arm::Treated}) {
    if (data_.arm_size(arm) == 0) continue;
    auto& proc = processes_[arm_index(arm)].emplace(weighted_processes(data_, fit_.weights, arm));
    curves_[arm_index(arm)] = iptw_km(proc);
  }
}

const WeightedProcesses& IptwAnalysis::processes(Arm arm) const {
  const auto& proc = processes_[arm_index(arm)];
  if (!proc) throw Error(ErrorCode::EmptyArm, "no subjects in arm " + std::to_string(arm_index(arm)));
  return *proc;
}

const SurvivalCurve& IptwAnalysis::curve(Arm arm) const {
  processes(arm);
  return *curves_[arm_index(arm)];
}

InfluenceTable IptwAnalysis::influence_table(double t, Arm arm) const {
  return psi_table(data_, fit_, influence_,
                   phi_components(data_, processes(arm), curve(arm), t));
}

VarianceReport IptwAnalysis::report(double t, Arm arm, double ci_level) const {
  return arm_report(influence_table(t, arm), ci_level);
}

VarianceReport IptwAnalysis::difference(double t, double ci_level) const {
  return difference_report(influence_table(t, Arm::Treated), influence_table(t, Arm::Control),
                           ci_level);
}

}  // namespace wkm
