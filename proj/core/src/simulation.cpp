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

#include "wkm/simulation.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "wkm/csv.hpp"
#include "wkm/error.hpp"
#include "wkm/propensity.hpp"
#include "wkm/quadrature.hpp"
#include "wkm/variance.hpp"

namespace wkm {
namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double mean_of(const std::vector<double>& xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

double sd_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  CompensatedSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(xs.size() - 1));
}

double linear(const std::vector<double>& coef, std::span<const double> z) {
  double eta = 0.0;
  for (std::size_t j = 0; j < coef.size(); ++j) eta += coef[j] * z[j];
  return eta;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void DgpConfig::validate() const {
  const auto p = static_cast<std::size_t>(covariate_dim) + 1;
  if (covariate_dim < 1 || gamma0.size() != p || eta_base.size() != p) {
    throw Error(ErrorCode::InvalidArgument,
                "gamma0 and eta_base must have 1 + covariate_dim entries");
  }
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be >= 2");
  if (!(censor_scale > 0.0) || !std::isfinite(censor_scale)) {
    throw Error(ErrorCode::InvalidArgument, "censor_scale must be positive");
  }
  if (!(t_eval >= 0.0) || !std::isfinite(beta0)) {
    throw Error(ErrorCode::InvalidArgument, "t_eval must be >= 0 and beta0 finite");
  }
}

std::vector<double> default_beta0_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 8; ++i) grid.push_back(0.25 * i);
  return grid;
}

Dataset generate_sample(const DgpConfig& config, std::uint64_t seed, std::uint64_t replication) {
  config.validate();
  std::seed_seq key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(replication >> 32)};
  std::mt19937_64 rng(key);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  std::exponential_distribution<double> exponential(1.0);

  const auto p = static_cast<std::size_t>(config.covariate_dim) + 1;
  std::vector<double> eta(p);
  for (std::size_t j = 0; j < p; ++j) eta[j] = config.eta_base[j] * config.beta0;

  std::vector<SubjectRecord> records;
  records.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    SubjectRecord r;
    r.covariates.resize(p);
    r.covariates[0] = 1.0;
    for (std::size_t j = 1; j < p; ++j) r.covariates[j] = normal(rng);
    r.treatment = uniform(rng) < logistic(linear(config.gamma0, r.covariates)) ? 1 : 0;

    const double scale = std::exp(linear(eta, r.covariates));
    const double failure = config.rate_parameterization ? exponential(rng) / scale
                                                        : exponential(rng) * scale;
    const double censoring = exponential(rng) * config.censor_scale;
    r.time = std::min(failure, censoring);
    r.event = failure <= censoring ? 1 : 0;
    records.push_back(std::move(r));
  }
  return Dataset::validate(std::move(records));
}

double true_survival(const DgpConfig& config, Arm /*arm*/, double t, int order) {
  config.validate();
  std::vector<double> eta(config.eta_base.size());
  for (std::size_t j = 0; j < eta.size(); ++j) eta[j] = config.eta_base[j] * config.beta0;
  std::vector<double> z(eta.size(), 1.0);
  return normal_expectation(
      [&](std::span<const double> x) {
        std::copy(x.begin(), x.end(), z.begin() + 1);
        const double lp = linear(eta, z);
        const double rate = config.rate_parameterization ? std::exp(lp) : std::exp(-lp);
        return std::exp(-t * rate);
      },
      config.covariate_dim, order);
}

ReplicationResult run_replication(const DgpConfig& config, std::uint64_t seed,
                                  std::uint64_t replication) {
  ReplicationResult result;
  try {
    const IptwAnalysis analysis(generate_sample(config, seed, replication));
    const auto treated = analysis.influence_table(config.t_eval, Arm::Treated);
    const auto control = analysis.influence_table(config.t_eval, Arm::Control);
    const auto diff = difference_report(treated, control, 0.95);

    result.estimate_arm1 = treated.survival;
    result.se_proposed_arm1 = se_proposed(treated);
    result.se_gamma_fixed_arm1 = se_gamma_fixed(treated);
    result.estimate_diff = diff.estimate;
    result.se_proposed_diff = diff.se_proposed;
    result.se_gamma_fixed_diff = diff.se_gamma_fixed;
    result.correction_norm_arm1 = treated.correction.norm();
    result.ok = true;
  } catch (const Error& e) {
    result.ok = false;
    result.failure = e.what();
  }
  return result;
}

std::vector<MonteCarloSummary> run_study(std::span<const DgpConfig> grid, StudyOptions options) {
  if (options.replications < 2) {
    throw Error(ErrorCode::InvalidArgument, "replications must be >= 2");
  }
  for (const auto& config : grid) config.validate();
  const double z = [&] {
    // validates the level as a side effect
    const auto ci = wald_ci(0.0, 1.0, options.ci_level);
    return ci.high;
  }();

  const std::size_t reps = options.replications;
  std::vector<ReplicationResult> results(grid.size() * reps);
  parallel_for(results.size(), options.parallelism, [&](std::size_t task) {
    results[task] = run_replication(grid[task / reps], options.seed, task % reps);
  });

  std::vector<MonteCarloSummary> summaries;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& config = grid[g];
    MonteCarloSummary s;
    s.beta0 = config.beta0;
    s.replications = reps;
    s.true_arm1 = true_survival(config, Arm::Treated, config.t_eval);
    s.true_diff = s.true_arm1 - true_survival(config, Arm::Control, config.t_eval);

    std::vector<double> est1, se1, sef1, estd, sed, sefd, corr;
    std::size_t hit1 = 0, hitf1 = 0, hitd = 0, hitfd = 0;
    auto covers = [z](double est, double se, double truth) {
      return est - z * se <= truth && truth <= est + z * se;
    };
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& res = results[g * reps + r];
      if (!res.ok) {
        ++s.failures;
        continue;
      }
      est1.push_back(res.estimate_arm1);
      se1.push_back(res.se_proposed_arm1);
      sef1.push_back(res.se_gamma_fixed_arm1);
      estd.push_back(res.estimate_diff);
      sed.push_back(res.se_proposed_diff);
      sefd.push_back(res.se_gamma_fixed_diff);
      corr.push_back(res.correction_norm_arm1);
      hit1 += covers(res.estimate_arm1, res.se_proposed_arm1, s.true_arm1);
      hitf1 += covers(res.estimate_arm1, res.se_gamma_fixed_arm1, s.true_arm1);
      hitd += covers(res.estimate_diff, res.se_proposed_diff, s.true_diff);
      hitfd += covers(res.estimate_diff, res.se_gamma_fixed_diff, s.true_diff);
    }
    s.flagged = 20 * s.failures > reps;
    const std::size_t ok = est1.size();
    if (ok < 2) {
      s.flagged = true;
      const double nan = std::nan("");
      s.mc_sd_arm1 = s.mean_se_proposed_arm1 = s.mean_se_gamma_fixed_arm1 = nan;
      s.mc_sd_diff = s.mean_se_proposed_diff = s.mean_se_gamma_fixed_diff = nan;
      s.coverage_proposed = s.coverage_gamma_fixed = nan;
      s.coverage_proposed_diff = s.coverage_gamma_fixed_diff = nan;
      s.mean_estimate_arm1 = s.mean_estimate_diff = s.mean_correction_norm_arm1 = nan;
      summaries.push_back(s);
      continue;
    }
    const double okd = static_cast<double>(ok);
    s.mc_sd_arm1 = sd_of(est1);
    s.mean_se_proposed_arm1 = mean_of(se1);
    s.mean_se_gamma_fixed_arm1 = mean_of(sef1);
    s.mc_sd_diff = sd_of(estd);
    s.mean_se_proposed_diff = mean_of(sed);
    s.mean_se_gamma_fixed_diff = mean_of(sefd);
    s.coverage_proposed = static_cast<double>(hit1) / okd;
    s.coverage_gamma_fixed = static_cast<double>(hitf1) / okd;
    s.coverage_proposed_diff = static_cast<double>(hitd) / okd;
    s.coverage_gamma_fixed_diff = static_cast<double>(hitfd) / okd;
    s.mean_estimate_arm1 = mean_of(est1);
    s.mean_estimate_diff = mean_of(estd);
    s.mean_correction_norm_arm1 = mean_of(corr);
    summaries.push_back(s);
  }
  return summaries;
}

std::string summary_csv(std::span<const MonteCarloSummary> summaries) {
  std::ostringstream out;
  for (std::size_t c = 0; c < kSummaryColumns.size(); ++c) {
    out << (c ? "," : "") << kSummaryColumns[c];
  }
  out << '\n';
  for (const auto& s : summaries) {
    out << format_exact(s.beta0) << ',' << s.replications << ',' << s.failures << ','
        << format_exact(s.mc_sd_arm1) << ',' << format_exact(s.mean_se_proposed_arm1) << ','
        << format_exact(s.mean_se_gamma_fixed_arm1) << ',' << format_exact(s.mc_sd_diff) << ','
        << format_exact(s.mean_se_proposed_diff) << ','
        << format_exact(s.mean_se_gamma_fixed_diff) << ','
        << format_exact(s.coverage_proposed) << ',' << format_exact(s.coverage_gamma_fixed)
        << '\n';
  }
  return out.str();
}

unsigned default_parallelism() {
  if (const char* env = std::getenv("WKM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace wkm
