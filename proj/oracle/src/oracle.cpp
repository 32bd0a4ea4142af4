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

#include "wkm/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "wkm/error.hpp"

namespace wkm::oracle {
namespace {

double dot(const std::vector<double>& z, const Eigen::VectorXd& gamma) {
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += z[j] * gamma[static_cast<Eigen::Index>(j)];
  return s;
}

// Direct exp form; adequate for the moderate linear predictors used in tests.
double expit(double x) { return std::exp(x) / (1.0 + std::exp(x)); }

double inverse_probability_weight(const SubjectRecord& r, const Eigen::VectorXd& gamma) {
  const double g = expit(dot(r.covariates, gamma));
  return r.treatment == 1 ? 1.0 / g : 1.0 / (1.0 - g);
}

std::vector<double> all_weights(std::span<const SubjectRecord> records,
                                const Eigen::VectorXd& gamma) {
  std::vector<double> w;
  for (const auto& r : records) w.push_back(inverse_probability_weight(r, gamma));
  return w;
}

double neg_loglik(std::span<const SubjectRecord> records, const Eigen::VectorXd& gamma) {
  double nll = 0.0;
  for (const auto& r : records) {
    const double eta = dot(r.covariates, gamma);
    const double log1pexp = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    nll -= r.treatment * eta - log1pexp;
  }
  return nll;
}

bool newton_fit(std::span<const SubjectRecord> records, std::size_t p, Eigen::VectorXd& gamma) {
  gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                 static_cast<Eigen::Index>(p));
    for (const auto& r : records) {
      const double g = expit(dot(r.covariates, gamma));
      for (std::size_t a = 0; a < p; ++a) {
        score[static_cast<Eigen::Index>(a)] += r.covariates[a] * (r.treatment - g);
        for (std::size_t b = 0; b < p; ++b) {
          hess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
              g * (1.0 - g) * r.covariates[a] * r.covariates[b];
        }
      }
    }
    if (score.cwiseAbs().maxCoeff() <= 1e-10) return true;
    if (gamma.cwiseAbs().maxCoeff() > 30.0) return false;
    try {
      gamma += gaussian_solve(hess, score);
    } catch (const Error&) {
      return false;
    }
    if (!gamma.allFinite()) return false;
  }
  return false;
}

// Weighted product-limit at t with ties grouped. Returns false when the arm
// is empty or t lies past its last observed time.
bool weighted_km_at(std::span<const SubjectRecord> records, const std::vector<double>& w, int k,
                    double t, double& value) {
  double last = -1.0;
  std::set<double> event_times;
  for (const auto& r : records) {
    if (r.treatment != k) continue;
    last = std::max(last, r.time);
    if (r.event == 1 && r.time <= t) event_times.insert(r.time);
  }
  if (last < 0.0 || t > last) return false;
  value = 1.0;
  for (double s : event_times) {
    double deaths = 0.0, at_risk = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (r.treatment != k) continue;
      if (r.time >= s) at_risk += w[i];
      if (r.time == s && r.event == 1) deaths += w[i];
    }
    value *= 1.0 - deaths / at_risk;
  }
  return true;
}

}  // namespace

OracleReport compare(std::string quantity, double optimized, double oracle) {
  OracleReport report;
  report.quantity = std::move(quantity);
  report.optimized = optimized;
  report.oracle = oracle;
  report.abs_deviation = std::abs(optimized - oracle);
  report.rel_deviation =
      oracle != 0.0 ? report.abs_deviation / std::abs(oracle) : report.abs_deviation;
  return report;
}

SurvivalCurve classical_km(const Dataset& data, Arm arm) {
  const int k = arm_index(arm);
  SurvivalCurve curve;
  curve.arm = arm;
  std::set<double> event_times;
  bool any = false;
  for (const auto& r : data.records()) {
    if (r.treatment != k) continue;
    any = true;
    curve.domain_end = std::max(curve.domain_end, r.time);
    if (r.event == 1) event_times.insert(r.time);
  }
  if (!any) throw Error(ErrorCode::EmptyArm, "no subjects in arm " + std::to_string(k));

  double s = 1.0;
  for (double t : event_times) {
    int deaths = 0, at_risk = 0;
    for (const auto& r : data.records()) {
      if (r.treatment != k) continue;
      if (r.time >= t) ++at_risk;
      if (r.time == t && r.event == 1) ++deaths;
    }
    s *= 1.0 - static_cast<double>(deaths) / at_risk;
    curve.knots.push_back(t);
    curve.values.push_back(s);
  }
  return curve;
}

double naive_at_risk(const Dataset& data, const std::vector<double>& weights, Arm arm, double t) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data[i].treatment == arm_index(arm) && data[i].time >= t) total += weights[i];
  }
  return total / static_cast<double>(data.n());
}

double naive_failures(const Dataset& data, const std::vector<double>& weights, Arm arm,
                      double t) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto& r = data[i];
    if (r.treatment == arm_index(arm) && r.event == 1 && r.time <= t) total += weights[i];
  }
  return total / static_cast<double>(data.n());
}

Eigen::MatrixXd naive_information(const Dataset& data, const Eigen::VectorXd& gamma) {
  const std::size_t p = data.p();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                            static_cast<Eigen::Index>(p));
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      double s = 0.0;
      for (const auto& r : data.records()) {
        const double g = expit(dot(r.covariates, gamma));
        s += g * (1.0 - g) * r.covariates[a] * r.covariates[b];
      }
      v(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          s / static_cast<double>(data.n());
    }
  }
  return v;
}

Eigen::VectorXd gaussian_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (a(pivot, col) == 0.0) throw Error(ErrorCode::SingularInformation, "zero pivot");
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      std::swap(b[pivot], b[col]);
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (Eigen::Index c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (Eigen::Index c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
    x[r] = s / a(r, r);
  }
  return x;
}

InfluenceTable brute_force_influence(const Dataset& data, const Eigen::VectorXd& gamma_hat,
                                     double t, Arm arm) {
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  const double nd = static_cast<double>(n);
  const int k = arm_index(arm);
  if (data.arm_size(arm) == 0) {
    throw Error(ErrorCode::EmptyArm, "no subjects in arm " + std::to_string(k));
  }

  const auto w = all_weights(data.records(), gamma_hat);
  auto q_hat = [&](double v) { return naive_at_risk(data, w, arm, v); };
  if (!(q_hat(t) > 0.0)) {
    throw Error(ErrorCode::TimeBeyondRiskSupport, "empty risk set at the evaluation time");
  }

  double survival = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& r = data[j];
    if (r.event == 1 && r.treatment == k && r.time <= t) {
      survival *= 1.0 - w[j] / (nd * q_hat(r.time));
    }
  }

  InfluenceTable table;
  table.t = t;
  table.arm = arm;
  table.survival = survival;
  const auto ni = static_cast<Eigen::Index>(n);
  table.phi1 = Eigen::VectorXd::Zero(ni);
  table.phi2 = Eigen::VectorXd::Zero(ni);
  table.phi = Eigen::VectorXd::Zero(ni);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ri = data[i];
    const auto ii = static_cast<Eigen::Index>(i);
    double s1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& rj = data[j];
      const bool in_sum = rj.event == 1 && rj.treatment == k && ri.treatment == k &&
                          rj.time <= std::min(t, ri.time);
      if (in_sum) s1 += w[j] / (nd * q_hat(rj.time) * q_hat(rj.time));
    }
    table.phi1[ii] = s1;
    if (ri.time <= t && ri.event == 1 && ri.treatment == k) table.phi2[ii] = 1.0 / q_hat(ri.time);
    table.phi[ii] = survival * (table.phi1[ii] - table.phi2[ii]);
  }

  // d/dgamma of 1/g is -(1-g)/g Z; of 1/(1-g) is g/(1-g) Z, using g' = g(1-g).
  Eigen::VectorXd correction = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < n; ++j) {
    const auto& rj = data[j];
    const double g = expit(dot(rj.covariates, gamma_hat));
    const double factor = rj.treatment == 1 ? -(1.0 - g) / g : g / (1.0 - g);
    for (std::size_t a = 0; a < p; ++a) {
      correction[static_cast<Eigen::Index>(a)] +=
          factor * rj.covariates[a] * table.phi[static_cast<Eigen::Index>(j)];
    }
  }
  correction /= nd;

  const auto v1 = naive_information(data, gamma_hat);
  table.weighted_phi = Eigen::VectorXd::Zero(ni);
  table.psi = Eigen::VectorXd::Zero(ni);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ri = data[i];
    const auto ii = static_cast<Eigen::Index>(i);
    const double residual = ri.treatment - expit(dot(ri.covariates, gamma_hat));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(p));
    for (std::size_t a = 0; a < p; ++a) rhs[static_cast<Eigen::Index>(a)] = ri.covariates[a] * residual;
    const Eigen::VectorXd zeta = gaussian_solve(v1, rhs);
    double zc = 0.0;
    for (Eigen::Index a = 0; a < zeta.size(); ++a) zc += zeta[a] * correction[a];
    table.weighted_phi[ii] = w[i] * table.phi[ii];
    table.psi[ii] = table.weighted_phi[ii] + zc;
  }
  table.correction = correction;
  return table;
}

Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& gamma, double step) {
  Eigen::VectorXd grad(gamma.size());
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    Eigen::VectorXd up = gamma, down = gamma;
    up[j] += step;
    down[j] -= step;
    grad[j] = (f(up) - f(down)) / (2.0 * step);
  }
  return grad;
}

Eigen::VectorXd derivative_free_logistic_mle(const Dataset& data) {
  const auto p = static_cast<Eigen::Index>(data.p());
  auto f = [&](const Eigen::VectorXd& x) { return neg_loglik(data.records(), x); };

  Eigen::VectorXd best = Eigen::VectorXd::Zero(p);
  double best_value = f(best);
  double scale = 1.0;
  for (int restart = 0; restart < 60; ++restart) {
    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(p) + 1, best);
    for (Eigen::Index j = 0; j < p; ++j) simplex[static_cast<std::size_t>(j) + 1][j] += scale;
    std::vector<double> values;
    for (const auto& v : simplex) values.push_back(f(v));

    for (int iter = 0; iter < 20000; ++iter) {
      std::vector<std::size_t> order(simplex.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[order.size() - 2];
      if (std::abs(values[hi] - values[lo]) <= 1e-16 * (1.0 + std::abs(values[lo]))) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
      for (std::size_t i = 0; i < simplex.size(); ++i) {
        if (i != hi) centroid += simplex[i];
      }
      centroid /= static_cast<double>(p);

      const Eigen::VectorXd reflected = centroid + (centroid - simplex[hi]);
      const double fr = f(reflected);
      if (fr < values[lo]) {
        const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[hi]);
        const double fe = f(expanded);
        if (fe < fr) {
          simplex[hi] = expanded;
          values[hi] = fe;
        } else {
          simplex[hi] = reflected;
          values[hi] = fr;
        }
      } else if (fr < values[second]) {
        simplex[hi] = reflected;
        values[hi] = fr;
      } else {
        const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[hi] - centroid);
        const double fc = f(contracted);
        if (fc < values[hi]) {
          simplex[hi] = contracted;
          values[hi] = fc;
        } else {
          for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i == lo) continue;
            simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
            values[i] = f(simplex[i]);
          }
        }
      }
    }
    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    const double improvement = best_value - *it;
    if (*it < best_value) {
      best = simplex[idx];
      best_value = *it;
    }
    scale = std::max(1e-4, 0.5 * scale);
    if (restart > 5 && improvement <= 0.0) break;
  }
  return best;
}

bool newton_logistic_mle(const Dataset& data, Eigen::VectorXd& gamma) {
  return newton_fit(data.records(), data.p(), gamma);
}

double bootstrap_se(const Dataset& data, double t, Target target, std::size_t resamples,
                    std::uint64_t seed) {
  if (resamples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two resamples");
  const std::size_t n = data.n();
  std::vector<double> estimates;
  std::size_t failures = 0;
  std::vector<SubjectRecord> sample(n);

  for (std::size_t b = 0; b < resamples; ++b) {
    std::seed_seq key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(key);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& r : sample) r = data[pick(rng)];

    Eigen::VectorXd gamma;
    if (!newton_fit(sample, data.p(), gamma)) {
      ++failures;
      continue;
    }
    const auto w = all_weights(sample, gamma);
    double s1 = 0.0, s0 = 0.0;
    bool ok = true;
    if (target != Target::Control) ok = ok && weighted_km_at(sample, w, 1, t, s1);
    if (target != Target::Treated) ok = ok && weighted_km_at(sample, w, 0, t, s0);
    if (!ok) {
      ++failures;
      continue;
    }
    estimates.push_back(target == Target::Treated   ? s1
                        : target == Target::Control ? s0
                                                    : s1 - s0);
  }
  if (20 * failures > resamples || estimates.size() < 2) {
    throw Error(ErrorCode::TooManyFailures,
                std::to_string(failures) + " of " + std::to_string(resamples) +
                    " bootstrap resamples failed");
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(estimates.size());
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  return std::sqrt(ss / static_cast<double>(estimates.size() - 1));
}

}  // namespace wkm::oracle
