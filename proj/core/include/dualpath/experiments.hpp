#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualpath/config.hpp"
#include "dualpath/csv.hpp"

namespace dualpath {

/// Library version string, e.g. "0.3.0".
const char* library_version();

/// A finished table plus whether every cell evaluated cleanly.
struct ExperimentOutput {
  std::string subcommand;
  std::size_t trials = 0;  ///< effective Monte Carlo trials per cell
  CsvTable table;
  bool clean = true;       ///< no rejected, divergent or unconverged cell
};

/// Cell status column values, most severe first: rejected (model undefined at
/// this input), diverged, unconverged, tail_warning, ok.
std::string cell_status(bool rejected, bool diverged, bool converged, bool tail_warning = false);

/// Monte Carlo trials used when config.trials == 0.
std::size_t default_trials(std::string_view subcommand);

/// Seed for grid cell `cell` of a run seeded with `seed`.
std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t cell);

/// SIR thresholds of the fig2 grid: -10 dB to 10 dB in 2.5 dB steps.
std::vector<double> fig2_thresholds_db();
/// (lambda_c, lambda_b) pairs of the fig3 study, lambda_c slowest.
std::vector<std::pair<double, double>> fig3_intensities();
std::vector<double> fig4_lambda_c();
/// 0 m to 1000 m in 20 m steps.
std::vector<double> fig4_distances();
/// Log-spaced axes of the fig5 grid; a "lambda_b" / "lambda_c" sweep axis in
/// the config replaces the corresponding default.
std::vector<double> fig5_lambda_b(const ExperimentConfig& config);
std::vector<double> fig5_lambda_c(const ExperimentConfig& config);

/// Per-k coverage over k = 1..5 and the fig2 thresholds. The Monte Carlo
/// column serves the k-th nearest BS so it estimates the same conditional
/// quantity as the analytic column.
/// Columns: k,T_dB,p_analytic,p_mc,mc_halfwidth,status
ExperimentOutput run_fig2(const ExperimentConfig& config);

/// Per-k coverage at the configured threshold over the fig3 intensities.
/// Columns: lambda_c,lambda_b,k,p_analytic,p_mc,mc_halfwidth,status
ExperimentOutput run_fig3(const ExperimentConfig& config);

/// Azimuth-averaged LoS probability Q(r) / 2 pi.
/// Columns: lambda_c,r_m,p_los,status
ExperimentOutput run_fig4(const ExperimentConfig& config);

/// Association-weighted average rate against end-to-end Monte Carlo.
/// Columns: lambda_b,lambda_c,rate_analytic,tail_mass,rate_mc,mc_halfwidth,status
ExperimentOutput run_fig5(const ExperimentConfig& config);

/// Single-point evaluators; one row per sweep point, sweep axes first.
/// coverage: k,T_dB,p_exact,p_bound,p_mc,mc_halfwidth,status
/// rate:     k_max,rate_analytic,tail_mass,rate_mc,mc_halfwidth,status
/// assoc:    k,p_analytic,analytic_se,p_sim,sim_se (last row k = "tail")
/// los:      r_m,theta_rad,p_los,p_los_avg,expected_count,mc_los,mc_los_se,mc_count,mc_count_se
ExperimentOutput run_coverage(const ExperimentConfig& config);
ExperimentOutput run_rate(const ExperimentConfig& config);
ExperimentOutput run_assoc(const ExperimentConfig& config);
ExperimentOutput run_los(const ExperimentConfig& config);

/// Dispatches one of fig2, fig3, fig4, fig5, coverage, rate, assoc, los.
/// Throws ConfigError for an unknown name.
ExperimentOutput run_experiment(std::string_view subcommand, const ExperimentConfig& config);

/// "#" header lines: tool, version, subcommand, seed, trials, modes, config
/// digest and the canonical config itself. Independent of the worker count
/// and the output path.
std::vector<std::pair<std::string, std::string>> csv_metadata(const ExperimentOutput& output,
                                                              const ExperimentConfig& config);

}  // namespace dualpath
