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

// Independent reference implementations used by the test suites and the
// hidden `wkm oracle` subcommand. Nothing here calls into the production
// estimation code (propensity, km, variance); only the plain data types are
// shared, so agreement between the two paths is evidence rather than
// tautology.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wkm/data_model.hpp"
#include "wkm/km.hpp"
#include "wkm/variance.hpp"

namespace wkm::oracle {

struct OracleReport {
  std::string quantity;
  double optimized = 0.0;
  double oracle = 0.0;
  double abs_deviation = 0.0;
  double rel_deviation = 0.0;
};

OracleReport compare(std::string quantity, double optimized, double oracle);

/// Textbook unweighted product-limit estimator (ties grouped, censorings at
/// a failure time kept in the risk set). Throws EmptyArm.
SurvivalCurve classical_km(const Dataset& data, Arm arm);

/// (1/n) sum_i w_i 1{T_i >= t, X_i = k} by a direct loop.
double naive_at_risk(const Dataset& data, const std::vector<double>& weights, Arm arm, double t);
/// (1/n) sum_i w_i 1{T_i <= t, delta_i = 1, X_i = k} by a direct loop.
double naive_failures(const Dataset& data, const std::vector<double>& weights, Arm arm,
                      double t);

/// (1/n) sum_i g_i (1 - g_i) Z_i Z_i' by an explicit triple loop.
Eigen::MatrixXd naive_information(const Dataset& data, const Eigen::VectorXd& gamma);

/// Gaussian elimination with partial pivoting. Throws SingularInformation on
/// a zero pivot.
Eigen::VectorXd gaussian_solve(Eigen::MatrixXd a, Eigen::VectorXd b);

/// Every Table-style symbol evaluated from its definition with O(n^2) loops:
/// weights, Q, the product-limit survival, phi1, phi2, phi, V1, zeta, the
/// weight gradient, the correction and psi. Intended for n <= 64.
InfluenceTable brute_force_influence(const Dataset& data, const Eigen::VectorXd& gamma_hat,
                                     double t, Arm arm);

/// Central differences, one coordinate at a time.
Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& gamma, double step);

/// Logistic MLE by Nelder-Mead on the negative log-likelihood (no
/// derivatives), restarted until the simplex stops improving.
Eigen::VectorXd derivative_free_logistic_mle(const Dataset& data);

/// Logistic MLE by a plain Newton iteration with Gaussian elimination.
/// Returns false on non-convergence or separation.
bool newton_logistic_mle(const Dataset& data, Eigen::VectorXd& gamma);

/// Nonparametric bootstrap SE of S_k(t) or S_1(t) - S_0(t). Each resample
/// refits the propensity model. Throws TooManyFailures if more than 5% of
/// resamples abort.
double bootstrap_se(const Dataset& data, double t, Target target, std::size_t resamples,
                    std::uint64_t seed);

}  // namespace wkm::oracle
