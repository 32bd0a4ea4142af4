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

#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "wkm/error.hpp"
#include "wkm/oracle/oracle.hpp"
#include "wkm/variance.hpp"

namespace wkm::cli {
namespace {

struct Stage {
  const char* name;
  int exit_code;
};

Stage stage_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound:
    case ErrorCode::ParseError:
      return {"parse", kExitParse};
    case ErrorCode::EmptyDataset:
    case ErrorCode::InconsistentCovariateLength:
    case ErrorCode::NonBinaryIndicator:
    case ErrorCode::NegativeTime:
    case ErrorCode::TiedFailureTimes:
    case ErrorCode::MissingInterceptColumn:
    case ErrorCode::EmptyArm:
      return {"validate", kExitValidate};
    case ErrorCode::Separation:
    case ErrorCode::SingularInformation:
    case ErrorCode::MaxIterationsExceeded:
    case ErrorCode::NonFiniteWeight:
      return {"fit", kExitFit};
    case ErrorCode::SchemaMismatch:
      return {"input", kExitOutput};
    case ErrorCode::TooManyFailures:
      return {"simulate", kExitSimulation};
    default:
      return {"estimate", kExitEstimate};
  }
}

int report_error(const char* command, const Error& e, std::ostream& err) {
  const auto stage = stage_of(e.code());
  err << "wkm " << command << ": " << stage.name << " failed: " << e.what() << '\n';
  return stage.exit_code;
}

std::vector<Arm> requested_arms(const std::string& arms) {
  if (arms == "both") return {Arm::Treated, Arm::Control};
  if (arms == "1") return {Arm::Treated};
  if (arms == "0") return {Arm::Control};
  throw Error(ErrorCode::InvalidArgument, "arms must be one of both, 1, 0");
}

std::string analysis_csv(const std::vector<VarianceReport>& reports) {
  std::ostringstream out;
  out << "time,arm,estimate,se_proposed,se_gamma_fixed,ci_level,ci_low,ci_high\n";
  for (const auto& r : reports) {
    out << format_exact(r.t) << ',' << to_string(r.target) << ',' << format_exact(r.estimate)
        << ',' << format_exact(r.se_proposed) << ',' << format_exact(r.se_gamma_fixed) << ','
        << format_exact(r.ci_level) << ',' << format_exact(r.ci.low) << ','
        << format_exact(r.ci.high) << '\n';
  }
  return out.str();
}

std::string analysis_text(const IptwAnalysis& analysis,
                          const std::vector<VarianceReport>& reports) {
  const auto& data = analysis.data();
  const auto& fit = analysis.fit();
  std::ostringstream out;
  out << "subjects: " << data.n() << "  (treated " << data.arm_size(Arm::Treated) << ", "
      << data.event_count(Arm::Treated) << " events; control " << data.arm_size(Arm::Control)
      << ", " << data.event_count(Arm::Control) << " events)\n";
  out << "propensity: " << fit.iterations << " Newton steps, score norm "
      << format_sig(fit.max_score_norm, 4) << ", coefficients";
  for (Eigen::Index j = 0; j < fit.gamma_hat.size(); ++j) {
    out << ' ' << format_sig(fit.gamma_hat[j], 4);
  }
  out << "\n\n";

  auto cell = [](const std::string& s, int width) {
    std::ostringstream c;
    c << std::setw(width) << s;
    return c.str();
  };
  out << cell("time", 10) << cell("arm", 6) << cell("estimate", 11) << cell("se", 11)
      << cell("se_fixed", 11) << cell("ci_low", 11) << cell("ci_high", 11) << '\n';
  for (const auto& r : reports) {
    out << cell(format_sig(r.t, 4), 10) << cell(std::string(to_string(r.target)), 6)
        << cell(format_sig(r.estimate, 4), 11) << cell(format_sig(r.se_proposed, 4), 11)
        << cell(format_sig(r.se_gamma_fixed, 4), 11) << cell(format_sig(r.ci.low, 4), 11)
        << cell(format_sig(r.ci.high, 4), 11) << '\n';
  }
  if (!reports.empty()) {
    out << "confidence level " << format_sig(reports.front().ci_level, 4)
        << "; se_fixed treats the propensity coefficients as known\n";
  }
  return out.str();
}

// Reads `key = value` lines (# comments allowed) and fills every option of
// `cmd` that was not given on the command line. Keys are long option names
// without the leading dashes.
void apply_config_file(CLI::App& cmd, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open config '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    const auto key = CLI::detail::trim_copy(line.substr(0, eq));
    if (key.empty()) continue;
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": expected key = value");
    }
    auto value = CLI::detail::trim_copy(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    CLI::Option* option = nullptr;
    try {
      option = cmd.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw Error(ErrorCode::InvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (option->count() > 0) continue;
    if (option->get_type_size() == 0) {
      if (value != "true" && value != "1") continue;
      option->add_result(std::string("true"));
    } else if (option->get_delimiter() != '\0') {
      std::stringstream items(value);
      std::string item;
      while (std::getline(items, item, option->get_delimiter())) {
        option->add_result(CLI::detail::trim_copy(item));
      }
    } else {
      option->add_result(value);
    }
    option->run_callback();
  }
}

}  // namespace

int cmd_analyze(const AnalysisConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.input.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--input is required");
    }
    if (config.times.empty()) {
      throw Error(ErrorCode::InvalidArgument, "at least one evaluation time is required");
    }
    if (!(config.ci_level > 0.0 && config.ci_level < 1.0)) {
      throw Error(ErrorCode::InvalidLevel, "confidence level must lie in (0, 1)");
    }
    if (config.format != "csv" && config.format != "text") {
      throw Error(ErrorCode::InvalidArgument, "format must be csv or text");
    }
    const auto arms = requested_arms(config.arms);

    auto data = read_csv(config.input, config.columns, {.jitter_ties = config.jitter_ties});
    for (Arm arm : arms) {
      if (data.arm_size(arm) == 0) {
        throw Error(ErrorCode::EmptyArm, "requested arm " + std::to_string(arm_index(arm)) +
                                             " has no subjects in '" + config.input.string() +
                                             "'");
      }
    }

    const IptwAnalysis analysis(std::move(data));
    std::vector<VarianceReport> reports;
    for (double t : config.times) {
      std::vector<InfluenceTable> tables;
      for (Arm arm : arms) {
        tables.push_back(analysis.influence_table(t, arm));
        reports.push_back(arm_report(tables.back(), config.ci_level));
      }
      if (arms.size() == 2) reports.push_back(difference_report(tables[0], tables[1], config.ci_level));
    }

    const auto text = analysis_text(analysis, reports);
    if (!config.out.empty()) {
      write_file_atomic(config.out, config.format == "csv" ? analysis_csv(reports) : text);
    }
    out << text;
    return kExitOk;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::InvalidLevel) {
      err << "wkm analyze: configuration error: " << e.what() << '\n';
      return 2;
    }
    return report_error("analyze", e, err);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "wkm analyze: output failed: " << e.what() << '\n';
    return kExitOutput;
  }
}

int cmd_simulate(const SimulateConfig& config, std::ostream& out, std::ostream& err) {
  try {
    std::vector<DgpConfig> grid;
    for (double beta0 : config.beta0_grid) {
      DgpConfig dgp;
      dgp.n = config.n;
      dgp.beta0 = beta0;
      dgp.t_eval = config.t_eval;
      dgp.rate_parameterization = config.rate_parameterization;
      grid.push_back(dgp);
    }
    StudyOptions options;
    options.replications = config.replications;
    options.seed = config.seed;
    options.parallelism = config.parallelism;
    options.ci_level = config.ci_level;
    const auto summaries = run_study(grid, options);

    bool flagged = false;
    for (const auto& s : summaries) {
      if (s.flagged) {
        err << "wkm simulate: beta0 = " << format_exact(s.beta0) << ": " << s.failures << " of "
            << s.replications << " replications failed (limit 5%)\n";
        flagged = true;
      }
    }
    if (flagged) return kExitSimulation;

    if (!config.out.empty()) write_file_atomic(config.out, summary_csv(summaries));

    out << "beta0  mc_sd_arm1  se/sd  fixed/sd  mc_sd_diff  se/sd  fixed/sd  coverage  "
           "coverage_fixed\n";
    std::size_t inversions = 0;
    for (std::size_t g = 0; g < summaries.size(); ++g) {
      const auto& s = summaries[g];
      if (g > 0 && s.mc_sd_arm1 > summaries[g - 1].mc_sd_arm1) ++inversions;
      out << std::setw(5) << format_sig(s.beta0, 4) << std::setw(12)
          << format_sig(s.mc_sd_arm1, 4) << std::setw(7)
          << format_sig(s.mean_se_proposed_arm1 / s.mc_sd_arm1, 3) << std::setw(10)
          << format_sig(s.mean_se_gamma_fixed_arm1 / s.mc_sd_arm1, 3) << std::setw(12)
          << format_sig(s.mc_sd_diff, 4) << std::setw(7)
          << format_sig(s.mean_se_proposed_diff / s.mc_sd_diff, 3) << std::setw(10)
          << format_sig(s.mean_se_gamma_fixed_diff / s.mc_sd_diff, 3) << std::setw(10)
          << format_sig(s.coverage_proposed, 3) << std::setw(16)
          << format_sig(s.coverage_gamma_fixed, 3) << '\n';
    }
    out << "trend: mc_sd_arm1 "
        << (inversions == 0 ? "nonincreasing across the grid"
                            : "has " + std::to_string(inversions) + " increase(s) across the grid")
        << '\n';
    return kExitOk;
  } catch (const Error& e) {
    return report_error("simulate", e, err);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "wkm simulate: output failed: " << e.what() << '\n';
    return kExitOutput;
  }
}

int cmd_figure(const std::filesystem::path& summary, int which,
               const std::filesystem::path& out, std::ostream& err) {
  try {
    if (which != 1 && which != 2) throw Error(ErrorCode::InvalidArgument, "figure must be 1 or 2");
    std::ifstream in(summary);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + summary.string() + "'");

    std::string line;
    std::getline(in, line);
    const auto header = split_csv_line(line);
    if (!std::equal(header.begin(), header.end(), kSummaryColumns.begin(), kSummaryColumns.end())) {
      throw Error(ErrorCode::SchemaMismatch,
                  "'" + summary.string() + "' does not have the simulation summary header");
    }
    const std::array<std::size_t, 4> columns =
        which == 1 ? std::array<std::size_t, 4>{0, 3, 4, 5} : std::array<std::size_t, 4>{0, 6, 7, 8};

    std::string result = "beta0,mc_sd,mean_se_proposed,mean_se_gamma_fixed\n";
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != kSummaryColumns.size()) {
        throw Error(ErrorCode::SchemaMismatch,
                    "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(kSummaryColumns.size()));
      }
      for (std::size_t c = 0; c < columns.size(); ++c) {
        result += (c ? "," : "") + fields[columns[c]];
      }
      result += '\n';
    }
    write_file_atomic(out, result);
    return kExitOk;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) {
      err << "wkm figure: configuration error: " << e.what() << '\n';
      return 2;
    }
    return report_error("figure", e, err);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "wkm figure: output failed: " << e.what() << '\n';
    return kExitOutput;
  }
}

int cmd_sample(const SampleConfig& config, std::ostream& err) {
  try {
    DgpConfig dgp;
    dgp.n = config.n;
    dgp.beta0 = config.beta0;
    write_csv(generate_sample(dgp, config.seed), config.out);
    return kExitOk;
  } catch (const Error& e) {
    return report_error("sample", e, err);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "wkm sample: output failed: " << e.what() << '\n';
    return kExitOutput;
  }
}

int cmd_oracle(const OracleConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Target target = config.target == "1"   ? Target::Treated
                          : config.target == "0" ? Target::Control
                          : config.target == "diff"
                              ? Target::Difference
                              : throw Error(ErrorCode::InvalidArgument, "target must be 1, 0 or diff");
    auto data = read_csv(config.input, config.columns, {.jitter_ties = config.jitter_ties});
    const IptwAnalysis analysis(data);
    const auto report = target == Target::Difference
                            ? analysis.difference(config.time)
                            : analysis.report(config.time, target == Target::Treated
                                                               ? Arm::Treated
                                                               : Arm::Control);
    const double boot = oracle::bootstrap_se(data, config.time, target, config.resamples,
                                             config.seed);
    std::vector<oracle::OracleReport> rows{
        oracle::compare("se_proposed vs bootstrap", report.se_proposed, boot),
        oracle::compare("se_gamma_fixed vs bootstrap", report.se_gamma_fixed, boot)};

    if (data.n() <= 64 && target != Target::Difference) {
      const Arm arm = target == Target::Treated ? Arm::Treated : Arm::Control;
      const auto fast = analysis.influence_table(config.time, arm);
      const auto brute =
          oracle::brute_force_influence(data, analysis.fit().gamma_hat, config.time, arm);
      rows.push_back(oracle::compare("max |psi - psi_brute|",
                                     (fast.psi - brute.psi).cwiseAbs().maxCoeff(), 0.0));
    }
    out << std::left << std::setw(30) << "quantity" << std::right << std::setw(14) << "optimized"
        << std::setw(14) << "oracle" << std::setw(12) << "rel_dev" << '\n';
    for (const auto& r : rows) {
      out << std::left << std::setw(30) << r.quantity << std::right << std::setw(14)
          << format_sig(r.optimized, 6) << std::setw(14) << format_sig(r.oracle, 6)
          << std::setw(12) << format_sig(r.rel_deviation, 3) << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error("oracle", e, err);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"IPTW Kaplan-Meier estimation with propensity-aware standard errors", "wkm"};
  app.require_subcommand(1);

  auto add_columns = [](CLI::App* cmd, ColumnMap& columns) {
    cmd->add_option("--time-col", columns.time, "Column holding the observed time")
        ->capture_default_str();
    cmd->add_option("--event-col", columns.event, "Column holding the event indicator")
        ->capture_default_str();
    cmd->add_option("--treatment-col", columns.treatment, "Column holding the treatment indicator")
        ->capture_default_str();
    cmd->add_option("--covariates", columns.covariates,
                    "Covariate columns for the propensity model (default: all others)")
        ->delimiter(',');
  };

  AnalysisConfig analysis;
  auto* analyze = app.add_subcommand("analyze", "Estimate survival curves and standard errors");
  std::filesystem::path analyze_config;
  analyze->add_option("--config", analyze_config, "Flat key=value file with option defaults");
  analyze->add_option("--input", analysis.input, "Survival CSV file");
  add_columns(analyze, analysis.columns);
  analyze->add_option("--times", analysis.times, "Evaluation times")->delimiter(',');
  analyze->add_option("--arms", analysis.arms, "both, 1 or 0")->capture_default_str();
  analyze->add_option("--ci-level", analysis.ci_level, "Wald interval level")
      ->capture_default_str();
  analyze->add_option("--out", analysis.out, "Report file");
  analyze->add_option("--format", analysis.format, "csv or text")->capture_default_str();
  analyze->add_flag("--jitter-ties", analysis.jitter_ties,
                    "Break tied failure times with a deterministic jitter");

  SimulateConfig simulation;
  simulation.parallelism = default_parallelism();
  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo study");
  std::filesystem::path simulate_config;
  simulate->add_option("--config", simulate_config, "Flat key=value file with option defaults");
  simulate->add_option("--beta0-grid", simulation.beta0_grid, "Outcome effect multipliers")
      ->delimiter(',');
  simulate->add_option("--reps", simulation.replications, "Replications per grid point")
      ->capture_default_str();
  simulate->add_option("--seed", simulation.seed)->capture_default_str();
  simulate->add_option("--parallelism", simulation.parallelism,
                       "Worker threads (default: WKM_THREADS or hardware)");
  simulate->add_option("--n", simulation.n, "Subjects per sample")->capture_default_str();
  simulate->add_option("--t-eval", simulation.t_eval, "Evaluation time")->capture_default_str();
  simulate->add_option("--ci-level", simulation.ci_level)->capture_default_str();
  simulate->add_flag("--rate-parameterization", simulation.rate_parameterization,
                     "Read the exponential scale parameters as rates instead of means");
  simulate->add_option("--out", simulation.out, "Summary CSV");

  std::filesystem::path figure_in, figure_out;
  int which = 1;
  auto* figure = app.add_subcommand("figure", "Extract plot data from a simulation summary");
  figure->add_option("--input", figure_in, "Summary CSV from `wkm simulate`")->required();
  figure->add_option("--which", which, "1 (arm 1) or 2 (difference)")->capture_default_str();
  figure->add_option("--out", figure_out, "Plot-data CSV")->required();

  SampleConfig sample;
  auto* sample_cmd = app.add_subcommand("sample", "Write one simulated dataset as CSV");
  sample_cmd->add_option("--n", sample.n)->capture_default_str();
  sample_cmd->add_option("--beta0", sample.beta0)->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed)->capture_default_str();
  sample_cmd->add_option("--out", sample.out)->required();

  OracleConfig oracle_config;
  auto* oracle_cmd = app.add_subcommand("oracle", "Cross-check standard errors");
  oracle_cmd->group("");
  oracle_cmd->add_option("--input", oracle_config.input)->required();
  add_columns(oracle_cmd, oracle_config.columns);
  oracle_cmd->add_option("--time", oracle_config.time);
  oracle_cmd->add_option("--target", oracle_config.target);
  oracle_cmd->add_option("--resamples", oracle_config.resamples);
  oracle_cmd->add_option("--seed", oracle_config.seed);
  oracle_cmd->add_flag("--jitter-ties", oracle_config.jitter_ties);

  try {
    app.parse(argc, argv);
    if (*analyze && !analyze_config.empty()) apply_config_file(*analyze, analyze_config);
    if (*simulate && !simulate_config.empty()) apply_config_file(*simulate, simulate_config);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const Error& e) {
    err << "wkm: configuration error: " << e.what() << '\n';
    return 2;
  }

  if (*analyze) return cmd_analyze(analysis, out, err);
  if (*simulate) return cmd_simulate(simulation, out, err);
  if (*figure) return cmd_figure(figure_in, which, figure_out, err);
  if (*sample_cmd) return cmd_sample(sample, err);
  return cmd_oracle(oracle_config, out, err);
}

}  // namespace wkm::cli
