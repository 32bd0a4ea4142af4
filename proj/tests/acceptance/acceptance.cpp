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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers as arguments to run
// a subset, e.g. `wkm_acceptance 1 2 3`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "generators.hpp"
#include "wkm/error.hpp"
#include "wkm/km.hpp"
#include "wkm/oracle/oracle.hpp"
#include "wkm/propensity.hpp"
#include "wkm/simulation.hpp"
#include "wkm/variance.hpp"

namespace {

using namespace wkm;

// Tolerances, pinned.
constexpr double kScoreTol = 1e-8;
constexpr double kZetaSumTol = 1e-6;
constexpr double kGradientRelTol = 1e-6;
constexpr double kGradientStep = 1e-6;
constexpr double kKmTol = 1e-12;
constexpr double kBruteForceTol = 1e-12;
constexpr double kInversionTol = 0.02;
constexpr double kSeRatioLow = 0.90;
constexpr double kSeRatioHigh = 1.10;
constexpr double kOverestimateAtTwo = 1.05;
constexpr double kCoverageLow = 0.93;
constexpr double kCoverageHigh = 0.97;
constexpr double kClosedFormTol = 1e-6;
constexpr double kMcSigmas = 3.0;
constexpr double kBootstrapRelTol = 0.15;
constexpr int kBootstrapRequired = 9;

constexpr std::uint64_t kStudySeed = 20240601;
const std::vector<double> kGrid{0.0, 0.5, 1.0, 1.5, 2.0};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Outcome score_identity() {
  DgpConfig config;
  config.n = 1000;
  const double betas[] = {0.0, 1.0, 2.0};
  double worst_score = 0.0, worst_zeta = 0.0;
  int converged = 0;
  for (int d = 0; d < 50; ++d) {
    config.beta0 = betas[d % 3];
    const auto data = generate_sample(config, 101, static_cast<std::uint64_t>(d));
    PropensityFit fit;
    try {
      fit = fit_logistic(data);
    } catch (const Error&) {
      continue;
    }
    ++converged;
    Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.p()));
    for (const auto& r : data.records()) {
      const Eigen::Map<const Eigen::VectorXd> z(r.covariates.data(),
                                                static_cast<Eigen::Index>(r.covariates.size()));
      score += z * (r.treatment - logistic(z.dot(fit.gamma_hat)));
    }
    const auto zeta = score_influence(fit, data).zeta;
    worst_score = std::max(worst_score, score.lpNorm<Eigen::Infinity>());
    worst_zeta = std::max(worst_zeta, zeta.colwise().sum().lpNorm<Eigen::Infinity>());
  }
  return {converged > 0 && worst_score <= kScoreTol && worst_zeta <= kZetaSumTol,
          std::to_string(converged) + "/50 converged; max |score| " + fmt(worst_score) +
              ", max |sum zeta| " + fmt(worst_zeta)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto r =
        testing::record(1.0, 1, coin(rng), {normal(rng), normal(rng), normal(rng)});
    Eigen::VectorXd gamma = testing::random_gamma(rng, 4, 1.0);
    const Eigen::Map<const Eigen::VectorXd> z(r.covariates.data(), 4);
    if (std::abs(z.dot(gamma)) > 10.0) gamma *= 5.0 / std::abs(z.dot(gamma));
    const auto analytic = weight_gradient(gamma, r);
    const auto numeric = oracle::finite_diff_gradient(
        [&](const Eigen::VectorXd& g) { return weight(g, r); }, gamma, kGradientStep);
    worst = std::max(worst, (analytic - numeric).norm() / analytic.norm());
  }
  return {worst < kGradientRelTol, "max relative error " + fmt(worst)};
}

Outcome equal_weights() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  double worst = 0.0;
  bool knots_match = true;
  for (int rep = 0; rep < 100; ++rep) {
    const auto data = testing::random_dataset(rng, size(rng), 1, 0.4);
    const std::vector<double> w(data.n(), scale(rng));
    for (Arm arm : {Arm::Treated, Arm::Control}) {
      const auto curve = iptw_km(weighted_processes(data, w, arm));
      const auto classical = oracle::classical_km(data, arm);
      if (curve.knots != classical.knots) {
        knots_match = false;
        continue;
      }
      for (std::size_t j = 0; j < curve.values.size(); ++j) {
        worst = std::max(worst, std::abs(curve.values[j] - classical.values[j]));
      }
    }
  }
  return {knots_match && worst <= kKmTol,
          std::string(knots_match ? "" : "knot mismatch; ") + "max deviation " + fmt(worst)};
}

Outcome brute_force() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> size(4, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto data = testing::random_dataset(rng, size(rng), 2, 0.35);
    const auto fit = testing::fit_at(data, testing::random_gamma(rng, 3));
    const auto infl = score_influence(fit, data);
    for (Arm arm : {Arm::Treated, Arm::Control}) {
      const auto proc = weighted_processes(data, fit.weights, arm);
      const double t = unit(rng) * proc.domain_end();
      const auto fast =
          psi_table(data, fit, infl, phi_components(data, proc, iptw_km(proc), t));
      const auto slow = oracle::brute_force_influence(data, fit.gamma_hat, t, arm);
      for (const auto& [a, b] : {std::pair{&fast.phi1, &slow.phi1}, std::pair{&fast.phi2, &slow.phi2},
                                 std::pair{&fast.phi, &slow.phi}, std::pair{&fast.psi, &slow.psi}}) {
        worst = std::max(worst, (*a - *b).lpNorm<Eigen::Infinity>());
      }
    }
  }
  return {worst <= kBruteForceTol, "max deviation over phi1, phi2, phi, psi " + fmt(worst)};
}

const std::vector<MonteCarloSummary>& study() {
  static const auto summaries = [] {
    std::vector<DgpConfig> grid;
    for (double b : kGrid) {
      DgpConfig c;
      c.beta0 = b;
      grid.push_back(c);
    }
    StudyOptions options;
    options.replications = 1000;
    options.seed = kStudySeed;
    options.parallelism = default_parallelism();
    return run_study(grid, options);
  }();
  return summaries;
}

struct Series {
  double mc_sd, se, se_fixed;
};

Series arm1(const MonteCarloSummary& s) {
  return {s.mc_sd_arm1, s.mean_se_proposed_arm1, s.mean_se_gamma_fixed_arm1};
}
Series diff(const MonteCarloSummary& s) {
  return {s.mc_sd_diff, s.mean_se_proposed_diff, s.mean_se_gamma_fixed_diff};
}

// (b) and (c) of the trend checks, shared by both series.
void check_se_series(const std::vector<MonteCarloSummary>& summaries, Series (*pick)(const MonteCarloSummary&),
                     Outcome& outcome) {
  std::ostringstream detail;
  detail << "se/sd";
  for (const auto& s : summaries) {
    const auto v = pick(s);
    const double ratio = v.se / v.mc_sd;
    detail << ' ' << fmt(ratio);
    if (!(ratio >= kSeRatioLow && ratio <= kSeRatioHigh)) outcome.pass = false;
    if (s.beta0 >= 0.5 && !(v.se_fixed >= v.se)) outcome.pass = false;
    if (s.failures > 0) outcome.pass = false;
  }
  detail << "; fixed/sd";
  for (const auto& s : summaries) {
    const auto v = pick(s);
    detail << ' ' << fmt(v.se_fixed / v.mc_sd);
  }
  const auto last = pick(summaries.back());
  if (!(summaries.back().beta0 == 2.0 && last.se_fixed / last.mc_sd >= kOverestimateAtTwo)) {
    outcome.pass = false;
  }
  outcome.detail += detail.str();
}

Outcome figure1_trend() {
  const auto& summaries = study();
  Outcome outcome;
  int inversions = 0;
  double worst_increase = 0.0;
  std::ostringstream detail;
  detail << "mc_sd";
  for (std::size_t g = 0; g < summaries.size(); ++g) {
    detail << ' ' << fmt(summaries[g].mc_sd_arm1);
    if (g > 0 && summaries[g].mc_sd_arm1 > summaries[g - 1].mc_sd_arm1) {
      ++inversions;
      worst_increase = std::max(
          worst_increase, summaries[g].mc_sd_arm1 / summaries[g - 1].mc_sd_arm1 - 1.0);
    }
  }
  outcome.pass = inversions == 0 || (inversions == 1 && worst_increase <= kInversionTol);
  outcome.detail = detail.str() + " (" + std::to_string(inversions) + " inversions); ";
  check_se_series(summaries, arm1, outcome);
  return outcome;
}

Outcome figure2_trend() {
  Outcome outcome;
  check_se_series(study(), diff, outcome);
  return outcome;
}

Outcome coverage() {
  Outcome outcome;
  std::ostringstream detail;
  detail << "arm1 proposed/fixed";
  for (const auto& s : study()) {
    detail << ' ' << fmt(s.coverage_proposed) << '/' << fmt(s.coverage_gamma_fixed);
    if (!(s.coverage_proposed >= kCoverageLow && s.coverage_proposed <= kCoverageHigh)) {
      outcome.pass = false;
    }
    if (!(s.coverage_proposed_diff >= kCoverageLow && s.coverage_proposed_diff <= kCoverageHigh)) {
      outcome.pass = false;
    }
    if (s.beta0 >= 1.0 && s.coverage_gamma_fixed < s.coverage_proposed) outcome.pass = false;
  }
  detail << "; diff proposed/fixed";
  for (const auto& s : study()) {
    detail << ' ' << fmt(s.coverage_proposed_diff) << '/' << fmt(s.coverage_gamma_fixed_diff);
  }
  outcome.detail = detail.str();
  return outcome;
}

Outcome true_values() {
  DgpConfig config;
  config.beta0 = 0.0;
  const double closed = true_survival(config, Arm::Treated, 0.5);
  const double closed_err = std::abs(closed - 0.6065307);

  config.beta0 = 1.0;
  const double quad = true_survival(config, Arm::Treated, 0.5);
  constexpr std::size_t kDraws = 10'000'000;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  std::exponential_distribution<double> exponential(1.0);
  std::size_t survivors = 0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    const double eta = 1.0 * normal(rng) + 2.0 * normal(rng) + 3.0 * normal(rng);
    survivors += exponential(rng) * std::exp(config.beta0 * eta) > 0.5;
  }
  const double mc = static_cast<double>(survivors) / kDraws;
  const double mc_se = std::sqrt(mc * (1.0 - mc) / kDraws);
  const double z = std::abs(quad - mc) / mc_se;
  return {closed_err <= kClosedFormTol && z <= kMcSigmas,
          "beta0=0: " + fmt(closed) + " (error " + fmt(closed_err) + "); beta0=1: quadrature " +
              fmt(quad) + " vs Monte Carlo " + fmt(mc) + " (" + fmt(z) + " SE)"};
}

Outcome bootstrap() {
  DgpConfig config;
  config.beta0 = 1.0;
  int within = 0;
  std::ostringstream detail;
  detail << "bootstrap/proposed";
  for (std::uint64_t d = 0; d < 10; ++d) {
    const auto data = generate_sample(config, 909, d);
    const IptwAnalysis analysis(data);
    const double se = analysis.report(0.5, Arm::Treated).se_proposed;
    const double boot = oracle::bootstrap_se(data, 0.5, Target::Treated, 500, 1000 + d);
    detail << ' ' << fmt(boot / se);
    within += std::abs(boot / se - 1.0) <= kBootstrapRelTol;
  }
  detail << " (" << within << "/10 within 15%)";
  return {within >= kBootstrapRequired, detail.str()};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "wkm_acceptance_determinism";
  std::filesystem::create_directories(dir);
  std::string csv[2];
  const unsigned threads[2] = {1, 8};
  std::ostringstream sink;
  for (int k = 0; k < 2; ++k) {
    cli::SimulateConfig config;
    config.beta0_grid = kGrid;
    config.replications = 200;
    config.seed = kStudySeed;
    config.parallelism = threads[k];
    config.out = dir / ("summary_" + std::to_string(threads[k]) + ".csv");
    if (cli::cmd_simulate(config, sink, sink) != cli::kExitOk) {
      return {false, "cmd_simulate failed: " + sink.str()};
    }
    std::ifstream in(config.out, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    csv[k] = s.str();
  }
  std::filesystem::remove_all(dir);
  return {!csv[0].empty() && csv[0] == csv[1],
          std::to_string(csv[0].size()) + " bytes at parallelism 1, " +
              (csv[0] == csv[1] ? "identical" : "different") + " at parallelism 8"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "score identity", score_identity},
      {2, "weight gradient vs finite differences", gradient_check},
      {3, "equal weights reduce to classical KM", equal_weights},
      {4, "influence functions vs brute force", brute_force},
      {5, "arm 1 standard error trend", figure1_trend},
      {6, "difference standard error trend", figure2_trend},
      {7, "Wald interval coverage", coverage},
      {8, "true survival values", true_values},
      {9, "bootstrap corroboration", bootstrap},
      {10, "parallel determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !outcome.pass;
    std::printf("%s [%d] %s: %s (%.1f s)\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
