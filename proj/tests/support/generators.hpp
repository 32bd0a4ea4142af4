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

// Hand-rolled generators for property-style tests.

#include <algorithm>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "wkm/data_model.hpp"
#include "wkm/propensity.hpp"

namespace wkm::testing {

/// Random dataset with continuous (tie-free) times, both arms nonempty,
/// q standard-normal covariates after the intercept.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t q,
                              double censor_prob = 0.3) {
  std::exponential_distribution<double> exponential(1.0);
  std::bernoulli_distribution censored(censor_prob);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;
  std::vector<SubjectRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.time = exponential(rng);
    r.event = censored(rng) ? 0 : 1;
    r.treatment = coin(rng) ? 1 : 0;
    r.covariates.push_back(1.0);
    for (std::size_t j = 0; j < q; ++j) r.covariates.push_back(normal(rng));
  }
  // both arms present
  records[0].treatment = 1;
  records[n > 1 ? 1 : 0].treatment = n > 1 ? 0 : 1;
  return Dataset::validate(std::move(records));
}

/// A PropensityFit evaluated at an arbitrary (not necessarily optimal) gamma,
/// for checks that only need internally consistent inputs.
inline PropensityFit fit_at(const Dataset& data, const Eigen::VectorXd& gamma) {
  PropensityFit fit;
  fit.gamma_hat = gamma;
  fit.information = logistic_information(data, gamma);
  fit.weights.resize(static_cast<Eigen::Index>(data.n()));
  for (std::size_t i = 0; i < data.n(); ++i) {
    fit.weights[static_cast<Eigen::Index>(i)] = weight(gamma, data[i]);
  }
  fit.converged = false;
  return fit;
}

inline Eigen::VectorXd random_gamma(std::mt19937_64& rng, std::size_t p, double scale = 0.8) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd g(static_cast<Eigen::Index>(p));
  for (auto& v : g) v = normal(rng);
  return g;
}

inline SubjectRecord record(double time, int event, int treatment, std::vector<double> z = {}) {
  SubjectRecord r;
  r.time = time;
  r.event = event;
  r.treatment = treatment;
  r.covariates.push_back(1.0);
  r.covariates.insert(r.covariates.end(), z.begin(), z.end());
  return r;
}

}  // namespace wkm::testing
