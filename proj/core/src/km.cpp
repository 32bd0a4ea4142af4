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

#include "wkm/km.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wkm/csv.hpp"
#include "wkm/error.hpp"

namespace wkm {

double WeightedProcesses::at_risk(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  return at_risk_suffix[static_cast<std::size_t>(it - times.begin())];
}

double WeightedProcesses::failures(double t) const {
  const auto it = std::upper_bound(event_times.begin(), event_times.end(), t);
  if (it == event_times.begin()) return 0.0;
  return failure_prefix[static_cast<std::size_t>(it - event_times.begin()) - 1];
}

WeightedProcesses weighted_processes(const Dataset& data, std::span<const double> weights,
                                     Arm arm) {
  if (weights.size() != data.n()) {
    throw Error(ErrorCode::InvalidArgument, "weight vector length does not match dataset");
  }
  const int k = arm_index(arm);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data[i].treatment != k) continue;
    if (!(std::isfinite(weights[i]) && weights[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "weight of record " + std::to_string(i) + " is not finite and positive");
    }
    members.push_back(i);
  }
  if (members.empty()) {
    throw Error(ErrorCode::EmptyArm, "no subjects in arm " + std::to_string(k));
  }
  std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
    return data[a].time < data[b].time;
  });

  WeightedProcesses proc;
  proc.arm = arm;
  proc.n = data.n();
  const double n = static_cast<double>(data.n());

  proc.times.reserve(members.size());
  for (auto i : members) proc.times.push_back(data[i].time);

  proc.at_risk_suffix.assign(members.size() + 1, 0.0);
  double suffix = 0.0;
  for (std::size_t m = members.size(); m-- > 0;) {
    suffix += weights[members[m]];
    proc.at_risk_suffix[m] = suffix / n;
  }

  double cumulative = 0.0;
  for (auto i : members) {
    if (data[i].event != 1) continue;
    cumulative += weights[i];
    proc.event_times.push_back(data[i].time);
    proc.event_weights.push_back(weights[i]);
    proc.failure_prefix.push_back(cumulative / n);
  }
  proc.event_at_risk.reserve(proc.event_times.size());
  for (double t : proc.event_times) proc.event_at_risk.push_back(proc.at_risk(t));
  return proc;
}

WeightedProcesses weighted_processes(const Dataset& data, const Eigen::VectorXd& weights,
                                     Arm arm) {
  return weighted_processes(
      data, std::span<const double>(weights.data(), static_cast<std::size_t>(weights.size())),
      arm);
}

SurvivalCurve iptw_km(const WeightedProcesses& processes) {
  SurvivalCurve curve;
  curve.arm = processes.arm;
  curve.domain_end = processes.domain_end();

  const double n = static_cast<double>(processes.n);
  const auto& times = processes.event_times;
  double survival = 1.0;
  for (std::size_t j = 0; j < times.size();) {
    // Failures sharing a time (only possible when validation was bypassed)
    // contribute one combined factor.
    double jump = 0.0;
    std::size_t m = j;
    for (; m < times.size() && times[m] == times[j]; ++m) jump += processes.event_weights[m];
    double factor = 1.0 - (jump / n) / processes.event_at_risk[j];
    if (factor < 0.0) {
      if (factor < -1e-12) {
        throw Error(ErrorCode::DegenerateRiskSet,
                    "weighted failure mass exceeds the risk set at time " +
                        format_exact(times[j]));
      }
      factor = 0.0;
    }
    survival *= factor;
    curve.knots.push_back(times[j]);
    curve.values.push_back(survival);
    j = m;
  }
  return curve;
}

double survival_at(const SurvivalCurve& curve, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "evaluation time must be >= 0");
  if (t > curve.domain_end) {
    throw Error(ErrorCode::UndefinedBeyondLastRisk,
                "time " + format_exact(t) + " is beyond the last at-risk time " +
                    format_exact(curve.domain_end));
  }
  const auto it = std::upper_bound(curve.knots.begin(), curve.knots.end(), t);
  if (it == curve.knots.begin()) return 1.0;
  return curve.values[static_cast<std::size_t>(it - curve.knots.begin()) - 1];
}

}  // namespace wkm
