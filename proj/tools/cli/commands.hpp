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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wkm/csv.hpp"
#include "wkm/simulation.hpp"

namespace wkm::cli {

// Exit statuses. Each failing pipeline stage has its own code.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 3;
inline constexpr int kExitValidate = 4;
inline constexpr int kExitFit = 5;
inline constexpr int kExitEstimate = 6;
inline constexpr int kExitSimulation = 7;
inline constexpr int kExitOutput = 8;

struct AnalysisConfig {
  std::filesystem::path input;
  ColumnMap columns;
  std::vector<double> times;
  std::string arms = "both";  // both | 1 | 0
  double ci_level = 0.95;
  std::filesystem::path out;
  std::string format = "csv";  // csv | text
  bool jitter_ties = false;
};

struct SimulateConfig {
  std::vector<double> beta0_grid = default_beta0_grid();
  std::size_t replications = 1000;
  std::uint64_t seed = 20240601;
  unsigned parallelism = 1;
  std::size_t n = 1000;
  double t_eval = 0.5;
  double ci_level = 0.95;
  bool rate_parameterization = false;
  std::filesystem::path out;
};

struct SampleConfig {
  std::size_t n = 200;
  double beta0 = 1.0;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

struct OracleConfig {
  std::filesystem::path input;
  ColumnMap columns;
  double time = 0.5;
  std::string target = "1";  // 1 | 0 | diff
  std::size_t resamples = 500;
  std::uint64_t seed = 1;
  bool jitter_ties = false;
};

/// Per (time, arm) estimates plus difference rows, as CSV (17 significant
/// digits) or an aligned text table (4 significant digits).
int cmd_analyze(const AnalysisConfig& config, std::ostream& out, std::ostream& err);

/// Monte Carlo summary CSV plus a trend check on `out`.
int cmd_simulate(const SimulateConfig& config, std::ostream& out, std::ostream& err);

/// Projects a summary CSV onto the three series of figure 1 (arm 1) or
/// figure 2 (difference): beta0, mc_sd, mean_se_proposed, mean_se_gamma_fixed.
int cmd_figure(const std::filesystem::path& summary, int which,
               const std::filesystem::path& out, std::ostream& err);

/// Writes one simulated dataset as CSV.
int cmd_sample(const SampleConfig& config, std::ostream& err);

/// Debugging aid: compares the analytic standard errors with the bootstrap
/// and, for small inputs, with the brute-force influence evaluation.
int cmd_oracle(const OracleConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wkm::cli
