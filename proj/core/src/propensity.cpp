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

#include "wkm/propensity.hpp"

#include <cmath>
#include <string>

#include "wkm/error.hpp"

namespace wkm {
namespace {

Eigen::Map<const Eigen::VectorXd> covariates_of(const SubjectRecord& r) {
  return {r.covariates.data(), static_cast<Eigen::Index>(r.covariates.size())};
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Eigen::LLT<Eigen::MatrixXd> factor_information(const Eigen::MatrixXd& info) {
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularInformation,
                "information matrix is not positive definite");
  }
  return llt;
}

}  // namespace

double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logistic_loglik(const Dataset& data, const Eigen::VectorXd& gamma) {
  double ll = 0.0;
  for (const auto& r : data.records()) {
    const double eta = covariates_of(r).dot(gamma);
    ll += r.treatment * eta - softplus(eta);
  }
  return ll;
}

Eigen::VectorXd logistic_score(const Dataset& data, const Eigen::VectorXd& gamma) {
  Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.p()));
  for (const auto& r : data.records()) {
    const auto z = covariates_of(r);
    score += z * (r.treatment - logistic(z.dot(gamma)));
  }
  return score;
}

Eigen::MatrixXd logistic_information(const Dataset& data, const Eigen::VectorXd& gamma) {
  const auto p = static_cast<Eigen::Index>(data.p());
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  for (const auto& r : data.records()) {
    const auto z = covariates_of(r);
    const double g = logistic(z.dot(gamma));
    info.selfadjointView<Eigen::Lower>().rankUpdate(z, g * (1.0 - g));
  }
  info = info.selfadjointView<Eigen::Lower>();
  return info / static_cast<double>(data.n());
}

PropensityFit fit_logistic(const Dataset& data, FitOptions options) {
  const auto p = static_cast<Eigen::Index>(data.p());
  const double n = static_cast<double>(data.n());

  PropensityFit fit;
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
  double ll = logistic_loglik(data, gamma);
  fit.loglik_path.push_back(ll);

  Eigen::VectorXd score;
  int iter = 0;
  for (;; ++iter) {
    score = logistic_score(data, gamma);
    const double norm = score.lpNorm<Eigen::Infinity>();
    if (norm <= options.tolerance) {
      fit.converged = true;
      break;
    }
    if (gamma.lpNorm<Eigen::Infinity>() > options.separation_cap) {
      throw Error(ErrorCode::Separation,
                  "coefficients exceeded " + std::to_string(options.separation_cap) +
                      " with score norm " + std::to_string(norm) +
                      "; treatment is (quasi-)separated by the covariates");
    }
    if (iter == options.max_iterations) break;

    const auto llt = factor_information(n * logistic_information(data, gamma));
    const Eigen::VectorXd step = llt.solve(score);

    // Step halving keeps the log-likelihood nondecreasing up to rounding.
    Eigen::VectorXd candidate = gamma + step;
    double candidate_ll = logistic_loglik(data, candidate);
    double scale = 1.0;
    const double slack = 1e-12 * (1.0 + std::abs(ll));
    for (int halving = 0; halving < 50 && !(candidate_ll >= ll - slack); ++halving) {
      scale *= 0.5;
      candidate = gamma + scale * step;
      candidate_ll = logistic_loglik(data, candidate);
    }
    gamma = candidate;
    ll = candidate_ll;
    fit.loglik_path.push_back(ll);
  }

  if (!fit.converged) {
    throw Error(ErrorCode::MaxIterationsExceeded,
                "Newton-Raphson did not converge in " + std::to_string(options.max_iterations) +
                    " iterations (score norm " +
                    std::to_string(score.lpNorm<Eigen::Infinity>()) + ")");
  }

  fit.gamma_hat = gamma;
  fit.iterations = iter;
  fit.max_score_norm = score.lpNorm<Eigen::Infinity>();
  fit.information = logistic_information(data, gamma);
  factor_information(fit.information);

  fit.weights.resize(static_cast<Eigen::Index>(data.n()));
  for (std::size_t i = 0; i < data.n(); ++i) {
    fit.weights[static_cast<Eigen::Index>(i)] = weight(gamma, data[i]);
  }
  return fit;
}

double weight(const Eigen::VectorXd& gamma, const SubjectRecord& record) {
  const double eta = covariates_of(record).dot(gamma);
  // 1/g(eta) = 1 + exp(-eta);  1/(1 - g(eta)) = 1 + exp(eta)
  const double w = 1.0 + std::exp(record.treatment == 1 ? -eta : eta);
  if (!std::isfinite(w)) {
    throw Error(ErrorCode::NonFiniteWeight, "weight overflow at linear predictor " +
                                                std::to_string(eta));
  }
  return w;
}

Eigen::VectorXd weight_gradient(const Eigen::VectorXd& gamma, const SubjectRecord& record) {
  const auto z = covariates_of(record);
  const double eta = z.dot(gamma);
  const double factor = record.treatment == 1 ? -std::exp(-eta) : std::exp(eta);
  if (!std::isfinite(factor)) {
    throw Error(ErrorCode::NonFiniteWeight, "weight gradient overflow at linear predictor " +
                                                std::to_string(eta));
  }
  return factor * z;
}

ScoreInfluence score_influence(const PropensityFit& fit, const Dataset& data) {
  const auto p = static_cast<Eigen::Index>(data.p());
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto llt = factor_information(fit.information);

  Eigen::MatrixXd contributions(p, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = data[static_cast<std::size_t>(i)];
    const auto z = covariates_of(r);
    contributions.col(i) = z * (r.treatment - logistic(z.dot(fit.gamma_hat)));
  }
  return ScoreInfluence{llt.solve(contributions).transpose()};
}

}  // namespace wkm
