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

#include <Eigen/Dense>

#include "wkm/data_model.hpp"

namespace wkm {

/// Logistic function exp(x) / (1 + exp(x)), evaluated without overflow.
double logistic(double x) noexcept;

/// Bernoulli log-likelihood of the treatment indicators under coefficients
/// `gamma`.
double logistic_loglik(const Dataset& data, const Eigen::VectorXd& gamma);

/// Score vector sum_i Z_i (X_i - g(gamma' Z_i)).
Eigen::VectorXd logistic_score(const Dataset& data, const Eigen::VectorXd& gamma);

/// Averaged information (1/n) sum_i g_i (1 - g_i) Z_i Z_i'.
Eigen::MatrixXd logistic_information(const Dataset& data, const Eigen::VectorXd& gamma);

struct FitOptions {
  double tolerance = 1e-10;   // on the infinity norm of the score
  int max_iterations = 50;
  double separation_cap = 30.0;  // on the infinity norm of gamma
};

/// Maximum-likelihood fit of the logistic propensity model.
struct PropensityFit {
  Eigen::VectorXd gamma_hat;
  Eigen::MatrixXd information;  // averaged information at gamma_hat
  Eigen::VectorXd weights;      // w(gamma_hat, O_i)
  int iterations = 0;
  bool converged = false;
  double max_score_norm = 0.0;
  // log-likelihood at each iterate, starting from gamma = 0
  std::vector<double> loglik_path;
};

/// Newton-Raphson with step halving, started at gamma = 0.
///
/// Throws Separation when the coefficients leave the cap without the score
/// vanishing, SingularInformation when the Cholesky factorization fails, and
/// MaxIterationsExceeded otherwise.
PropensityFit fit_logistic(const Dataset& data, FitOptions options = {});

/// Inverse-probability-of-received-treatment weight.
double weight(const Eigen::VectorXd& gamma, const SubjectRecord& record);

/// Analytic gradient of `weight` with respect to gamma:
/// X = 1: -(1 - g)/g * Z;  X = 0: g/(1 - g) * Z.
Eigen::VectorXd weight_gradient(const Eigen::VectorXd& gamma, const SubjectRecord& record);

/// Per-subject score influence V1^{-1} Z_i (X_i - g(gamma_hat' Z_i)), one
/// row per subject.
struct ScoreInfluence {
  Eigen::MatrixXd zeta;  // n x p
};

ScoreInfluence score_influence(const PropensityFit& fit, const Dataset& data);

}  // namespace wkm
