#include "dualpath/experiments.hpp"

#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "dualpath/analysis.hpp"
#include "dualpath/error.hpp"
#include "dualpath/parallel.hpp"
#include "dualpath/pathloss.hpp"
#include "dualpath/rng.hpp"
#include "dualpath/simulate.hpp"

#ifndef DUALPATH_VERSION_STRING
#define DUALPATH_VERSION_STRING "0.0.0"
#endif

namespace dualpath {

namespace {

constexpr int kFigureKMax = 5;

std::string num(double v) { return format_number(v); }

TrialConfig trial_config(const ExperimentConfig& cfg, const NetworkParams& params,
                         std::size_t trials, AssociationRule rule, int forced_k,
                         std::uint64_t seed) {
  TrialConfig t;
  t.params = params;
  t.trials = trials;
  t.master_seed = seed;
  t.blockage_mode = cfg.blockage;
  t.association = rule;
  t.forced_k = forced_k;
  t.k_track = std::max(cfg.k_max, 8);
  return t;
}

// The Bessel form of the Laplace exponent is infinite for every s > 0 once
// lambda_c > 0; coverage and rate then collapse to zero.
bool mode_diverges(const NetworkParams& p, LaplaceMode mode) {
  if (mode != LaplaceMode::bessel_bound || p.lambda_b == 0.0) return false;
  return laplace_interference(1.0, 1.0, p, mode).diverged;
}

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

const SweepAxis* find_axis(const ExperimentConfig& cfg, std::string_view name) {
  for (const SweepAxis& a : cfg.sweep)
    if (a.name == name) return &a;
  return nullptr;
}

std::size_t effective_trials(std::string_view subcommand, const ExperimentConfig& cfg) {
  return cfg.trials > 0 ? cfg.trials : default_trials(subcommand);
}

struct CoverageCell {
  std::optional<CoverageResult> result;  // empty when rejected
};

CoverageCell coverage_cell(int k, double threshold, const NetworkParams& p, LaplaceMode mode) {
  try {
    return {coverage_probability(k, threshold, p, mode)};
  } catch (const DomainError&) {
    return {};
  }
}

struct McCell {
  std::optional<Estimate> estimate;  // empty when rejected
};

// Per-k coverage study shared by fig2 and fig3: analytic cells in parallel,
// then one forced-k simulation per (parameter set, k) over all thresholds.
struct PerKStudy {
  std::vector<CoverageCell> analytic;              // [set][k][threshold]
  std::vector<std::vector<Estimate>> mc;           // [set * K + k][threshold]
  std::vector<bool> mc_rejected;
};

PerKStudy per_k_study(const ExperimentConfig& cfg, const std::vector<NetworkParams>& sets,
                      const std::vector<double>& thresholds, std::size_t trials) {
  const std::size_t n_t = thresholds.size();
  const std::size_t per_set = kFigureKMax * n_t;
  PerKStudy study;
  study.analytic.resize(sets.size() * per_set);
  parallel_for(study.analytic.size(), [&](std::size_t i) {
    const std::size_t set = i / per_set;
    const int k = static_cast<int>((i % per_set) / n_t) + 1;
    study.analytic[i] = coverage_cell(k, thresholds[i % n_t], sets[set], cfg.mode);
  });
  for (std::size_t set = 0; set < sets.size(); ++set) {
    for (int k = 1; k <= kFigureKMax; ++k) {
      const std::uint64_t cell = set * kFigureKMax + static_cast<std::uint64_t>(k - 1);
      try {
        const TrialConfig t = trial_config(cfg, sets[set], trials, AssociationRule::nearest_k, k,
                                           cell_seed(cfg.seed, cell));
        study.mc.push_back(simulate(t, thresholds).coverage);
        study.mc_rejected.push_back(false);
      } catch (const DomainError&) {
        study.mc.emplace_back(n_t, Estimate{});
        study.mc_rejected.push_back(true);
      }
    }
  }
  return study;
}

void add_coverage_cells(ExperimentOutput& out, std::vector<std::string> row,
                        const CoverageCell& a, const Estimate& mc, bool mc_rejected,
                        bool diverged) {
  const bool rejected = !a.result || mc_rejected;
  const bool converged = a.result ? a.result->quadrature.converged : true;
  const bool div = diverged || (a.result && a.result->diverged);
  row.push_back(a.result ? num(a.result->probability) : "nan");
  row.push_back(mc_rejected ? "nan" : num(mc.value));
  row.push_back(mc_rejected ? "nan" : num(mc.half_width));
  row.push_back(cell_status(rejected, div, converged));
  out.clean = out.clean && !rejected && !div && converged;
  out.table.add_row(std::move(row));
}

std::vector<std::string> sweep_header(const ExperimentConfig& cfg,
                                      std::vector<std::string> columns) {
  std::vector<std::string> header;
  for (const SweepAxis& a : cfg.sweep) header.push_back(a.name);
  header.insert(header.end(), columns.begin(), columns.end());
  return header;
}

std::vector<std::string> sweep_prefix(const ExperimentConfig& cfg, const NetworkParams& p) {
  std::vector<std::string> cells;
  for (const SweepAxis& a : cfg.sweep) cells.push_back(num(get_parameter(p, a.name)));
  return cells;
}

}  // namespace

const char* library_version() { return DUALPATH_VERSION_STRING; }

std::string cell_status(bool rejected, bool diverged, bool converged, bool tail_warning) {
  if (rejected) return "rejected";
  if (diverged) return "diverged";
  if (!converged) return "unconverged";
  if (tail_warning) return "tail_warning";
  return "ok";
}

std::size_t default_trials(std::string_view subcommand) {
  if (subcommand == "fig2" || subcommand == "fig3") return 20'000;
  if (subcommand == "fig5") return 4'000;
  if (subcommand == "fig4") return 0;
  return 100'000;
}

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t cell) {
  return splitmix64(splitmix64(seed) ^ (cell + 0x9E3779B97F4A7C15ULL));
}

std::vector<double> fig2_thresholds_db() {
  std::vector<double> out;
  for (int i = 0; i <= 8; ++i) out.push_back(-10.0 + 2.5 * i);
  return out;
}

std::vector<std::pair<double, double>> fig3_intensities() {
  const double sparse = 1.0 / (800.0 * 800.0 * kPi);
  const double dense = 1.0 / (200.0 * 200.0 * kPi);
  return {{0.0002, sparse}, {0.0002, dense}, {0.002, sparse}, {0.002, dense}};
}

std::vector<double> fig4_lambda_c() { return {0.0005, 0.001, 0.002}; }

std::vector<double> fig4_distances() {
  std::vector<double> out;
  for (int i = 0; i <= 50; ++i) out.push_back(20.0 * i);
  return out;
}

std::vector<double> fig5_lambda_b(const ExperimentConfig& config) {
  if (const SweepAxis* a = find_axis(config, "lambda_b")) return a->values;
  return log_space(1.0 / (800.0 * 800.0 * kPi), 0.0012, 8);
}

std::vector<double> fig5_lambda_c(const ExperimentConfig& config) {
  if (const SweepAxis* a = find_axis(config, "lambda_c")) return a->values;
  return log_space(0.0001, 0.002, 8);
}

ExperimentOutput run_fig2(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out{"fig2", effective_trials("fig2", cfg), {}, true};
  out.table.header = {"k", "T_dB", "p_analytic", "p_mc", "mc_halfwidth", "status"};
  const std::vector<double> tdb = fig2_thresholds_db();
  std::vector<double> thresholds;
  for (double d : tdb) thresholds.push_back(db_to_linear(d));
  const PerKStudy study = per_k_study(cfg, {cfg.params}, thresholds, out.trials);
  const bool diverged = mode_diverges(cfg.params, cfg.mode);
  for (int k = 1; k <= kFigureKMax; ++k) {
    const std::size_t kk = static_cast<std::size_t>(k - 1);
    for (std::size_t t = 0; t < tdb.size(); ++t) {
      add_coverage_cells(out, {std::to_string(k), num(tdb[t])},
                         study.analytic[kk * tdb.size() + t], study.mc[kk][t],
                         study.mc_rejected[kk], diverged);
    }
  }
  return out;
}

ExperimentOutput run_fig3(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out{"fig3", effective_trials("fig3", cfg), {}, true};
  out.table.header = {"lambda_c", "lambda_b", "k", "p_analytic", "p_mc", "mc_halfwidth", "status"};
  const auto combos = fig3_intensities();
  std::vector<NetworkParams> sets;
  for (const auto& [lc, lb] : combos) {
    NetworkParams p = cfg.params;
    p.lambda_c = lc;
    p.lambda_b = lb;
    sets.push_back(p);
  }
  const std::vector<double> thresholds{cfg.params.sir_threshold};
  const PerKStudy study = per_k_study(cfg, sets, thresholds, out.trials);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const bool diverged = mode_diverges(sets[s], cfg.mode);
    for (int k = 1; k <= kFigureKMax; ++k) {
      const std::size_t cell = s * kFigureKMax + static_cast<std::size_t>(k - 1);
      add_coverage_cells(out, {num(combos[s].first), num(combos[s].second), std::to_string(k)},
                         study.analytic[cell], study.mc[cell][0], study.mc_rejected[cell],
                         diverged);
    }
  }
  return out;
}

ExperimentOutput run_fig4(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out{"fig4", 0, {}, true};
  out.table.header = {"lambda_c", "r_m", "p_los", "status"};
  const std::vector<double> lcs = fig4_lambda_c();
  const std::vector<double> rs = fig4_distances();
  std::vector<double> values(lcs.size() * rs.size());
  parallel_for(values.size(), [&](std::size_t i) {
    NetworkParams p = cfg.params;
    p.lambda_c = lcs[i / rs.size()];
    values[i] = mean_los_probability(rs[i % rs.size()], p);
  });
  for (std::size_t i = 0; i < values.size(); ++i)
    out.table.add_row({num(lcs[i / rs.size()]), num(rs[i % rs.size()]), num(values[i]), "ok"});
  return out;
}

ExperimentOutput run_fig5(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out{"fig5", effective_trials("fig5", cfg), {}, true};
  out.table.header = {"lambda_b", "lambda_c", "rate_analytic", "tail_mass",
                      "rate_mc", "mc_halfwidth", "status"};
  const std::vector<double> lbs = fig5_lambda_b(cfg);
  const std::vector<double> lcs = fig5_lambda_c(cfg);
  const std::size_t n = lbs.size() * lcs.size();
  auto cell_params = [&](std::size_t i) {
    NetworkParams p = cfg.params;
    p.lambda_b = lbs[i / lcs.size()];
    p.lambda_c = lcs[i % lcs.size()];
    return p;
  };
  std::vector<std::optional<AverageRateResult>> analytic(n);
  parallel_for(n, [&](std::size_t i) {
    try {
      analytic[i] = average_rate(cell_params(i), cfg.k_max, cfg.mode, cfg.assoc_samples,
                                 cell_seed(cfg.seed, 2 * i));
    } catch (const DomainError&) {
      analytic[i].reset();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    const NetworkParams p = cell_params(i);
    std::optional<Estimate> mc;
    try {
      mc = simulate(trial_config(cfg, p, out.trials, cfg.association, 1,
                                 cell_seed(cfg.seed, 2 * i + 1)),
                    {})
               .mean_rate;
    } catch (const DomainError&) {
      mc.reset();
    }
    const auto& a = analytic[i];
    const bool rejected = !a || !mc;
    const bool diverged = !rejected && mode_diverges(p, cfg.mode);
    const bool converged = !a || a->converged;
    const bool tail = a && a->tail_warning;
    out.clean = out.clean && !rejected && !diverged && converged && !tail;
    out.table.add_row({num(p.lambda_b), num(p.lambda_c), a ? num(a->value) : "nan",
                       a ? num(a->tail_mass) : "nan", mc ? num(mc->value) : "nan",
                       mc ? num(mc->half_width) : "nan",
                       cell_status(rejected, diverged, converged, tail)});
  }
  return out;
}

ExperimentOutput run_coverage(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out{"coverage", effective_trials("coverage", cfg), {}, true};
  out.table.header = sweep_header(
      cfg, {"k", "T_dB", "p_exact", "p_bound", "p_mc", "mc_halfwidth", "status"});
  const std::vector<NetworkParams> points = sweep_points(cfg);
  std::vector<CoverageCell> exact(points.size());
  std::vector<CoverageCell> bound(points.size());
  parallel_for(2 * points.size(), [&](std::size_t i) {
    const NetworkParams& p = points[i / 2];
    if (i % 2 == 0)
      exact[i / 2] = coverage_cell(cfg.k, p.sir_threshold, p, LaplaceMode::exact_angular);
    else
      bound[i / 2] = coverage_cell(cfg.k, p.sir_threshold, p, LaplaceMode::bessel_bound);
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    const NetworkParams& p = points[i];
    std::optional<Estimate> mc;
    try {
      const double thr[] = {p.sir_threshold};
      mc = simulate(trial_config(cfg, p, out.trials, AssociationRule::nearest_k, cfg.k,
                                 cell_seed(cfg.seed, i)),
                    thr)
               .coverage[0];
    } catch (const DomainError&) {
      mc.reset();
    }
    const bool rejected = !exact[i].result || !mc;
    const bool converged = (!exact[i].result || exact[i].result->quadrature.converged) &&
                           (!bound[i].result || bound[i].result->quadrature.converged);
    // The bound column may diverge while the exact one is fine; report that
    // through the value (0) rather than the row status.
    out.clean = out.clean && !rejected && converged;
    std::vector<std::string> row = sweep_prefix(cfg, p);
    row.insert(row.end(), {std::to_string(cfg.k), num(linear_to_db(p.sir_threshold)),
                           exact[i].result ? num(exact[i].result->probability) : "nan",
                           bound[i].result ? num(bound[i].result->probability) : "nan",
                           mc ? num(mc->value) : "nan", mc ? num(mc->half_width) : "nan",
                           cell_status(rejected, false, converged)});
    out.table.add_row(std::move(row));
  }
  return out;
}

ExperimentOutput run_rate(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out{"rate", effective_trials("rate", cfg), {}, true};
  out.table.header = sweep_header(
      cfg, {"k_max", "rate_analytic", "tail_mass", "rate_mc", "mc_halfwidth", "status"});
  const std::vector<NetworkParams> points = sweep_points(cfg);
  std::vector<std::optional<AverageRateResult>> analytic(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    try {
      analytic[i] = average_rate(points[i], cfg.k_max, cfg.mode, cfg.assoc_samples,
                                 cell_seed(cfg.seed, 2 * i));
    } catch (const DomainError&) {
      analytic[i].reset();
    }
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    const NetworkParams& p = points[i];
    std::optional<Estimate> mc;
    try {
      mc = simulate(trial_config(cfg, p, out.trials, cfg.association, 1,
                                 cell_seed(cfg.seed, 2 * i + 1)),
                    {})
               .mean_rate;
    } catch (const DomainError&) {
      mc.reset();
    }
    const auto& a = analytic[i];
    const bool rejected = !a || !mc;
    const bool diverged = !rejected && mode_diverges(p, cfg.mode);
    const bool converged = !a || a->converged;
    const bool tail = a && a->tail_warning;
    out.clean = out.clean && !rejected && !diverged && converged && !tail;
    std::vector<std::string> row = sweep_prefix(cfg, p);
    row.insert(row.end(), {std::to_string(cfg.k_max), a ? num(a->value) : "nan",
                           a ? num(a->tail_mass) : "nan", mc ? num(mc->value) : "nan",
                           mc ? num(mc->half_width) : "nan",
                           cell_status(rejected, diverged, converged, tail)});
    out.table.add_row(std::move(row));
  }
  return out;
}

ExperimentOutput run_assoc(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out{"assoc", effective_trials("assoc", cfg), {}, true};
  out.table.header = sweep_header(cfg, {"k", "p_analytic", "analytic_se", "p_sim", "sim_se"});
  const std::vector<NetworkParams> points = sweep_points(cfg);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const NetworkParams& p = points[i];
    std::optional<AssociationDistribution> a;
    std::optional<SimulationSummary> sim;
    try {
      a = association_distribution(cfg.k_max, p, cfg.assoc_samples, cell_seed(cfg.seed, 2 * i));
      TrialConfig t = trial_config(cfg, p, out.trials, cfg.association, 1,
                                   cell_seed(cfg.seed, 2 * i + 1));
      t.k_track = cfg.k_max;
      sim = simulate(t, {});
    } catch (const DomainError&) {
      out.clean = false;
    }
    for (int k = 1; k <= cfg.k_max + 1; ++k) {
      const std::size_t j = static_cast<std::size_t>(k - 1);
      const bool tail = k > cfg.k_max;
      std::vector<std::string> row = sweep_prefix(cfg, p);
      row.push_back(tail ? "tail" : std::to_string(k));
      if (a) {
        row.push_back(num(tail ? a->tail_mass : a->probs[j]));
        row.push_back(num(tail ? 0.0 : a->std_errors[j]));
      } else {
        row.insert(row.end(), {"nan", "nan"});
      }
      if (sim) {
        row.push_back(num(sim->association_hist[j]));
        row.push_back(num(sim->association_std_errors[j]));
      } else {
        row.insert(row.end(), {"nan", "nan"});
      }
      out.table.add_row(std::move(row));
    }
  }
  return out;
}

ExperimentOutput run_los(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentOutput out{"los", effective_trials("los", cfg), {}, true};
  out.table.header =
      sweep_header(cfg, {"r_m", "theta_rad", "p_los", "p_los_avg", "expected_count", "mc_los",
                         "mc_los_se", "mc_count", "mc_count_se"});
  const std::vector<NetworkParams> points = sweep_points(cfg);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const NetworkParams& p = points[i];
    const LinkLosEstimate e = estimate_link_los(p, cfg.r, cfg.theta, out.trials,
                                                cell_seed(cfg.seed, i));
    std::vector<std::string> row = sweep_prefix(cfg, p);
    row.insert(row.end(), {num(cfg.r), num(cfg.theta), num(los_probability(cfg.r, cfg.theta, p)),
                           num(mean_los_probability(cfg.r, p)),
                           num(expected_blockage_count(cfg.r, cfg.theta, p)),
                           num(e.los_frequency), num(e.los_std_error), num(e.mean_count),
                           num(e.count_std_error)});
    out.table.add_row(std::move(row));
  }
  return out;
}

ExperimentOutput run_experiment(std::string_view subcommand, const ExperimentConfig& config) {
  if (subcommand == "fig2") return run_fig2(config);
  if (subcommand == "fig3") return run_fig3(config);
  if (subcommand == "fig4") return run_fig4(config);
  if (subcommand == "fig5") return run_fig5(config);
  if (subcommand == "coverage") return run_coverage(config);
  if (subcommand == "rate") return run_rate(config);
  if (subcommand == "assoc") return run_assoc(config);
  if (subcommand == "los") return run_los(config);
  throw ConfigError(fmt::format("unknown subcommand '{}'", subcommand));
}

std::vector<std::pair<std::string, std::string>> csv_metadata(const ExperimentOutput& output,
                                                              const ExperimentConfig& config) {
  ExperimentConfig canonical = config;
  canonical.output_path.clear();
  std::vector<std::pair<std::string, std::string>> meta{
      {"tool", "dualpath"},
      {"version", library_version()},
      {"subcommand", output.subcommand},
      {"seed", std::to_string(config.seed)},
      {"trials", std::to_string(output.trials)},
      {"mode", to_string(config.mode)},
      {"blockage", to_string(config.blockage)},
      {"assoc", to_string(config.association)},
  };
  if (output.subcommand == "fig2" || output.subcommand == "fig3" ||
      output.subcommand == "coverage")
    meta.emplace_back("mc_serving", "k-th nearest BS (matches the per-k analytic conditioning)");
  meta.emplace_back("config_digest", config_digest(config));
  meta.emplace_back("config", serialize_config(canonical));
  return meta;
}

}  // namespace dualpath
