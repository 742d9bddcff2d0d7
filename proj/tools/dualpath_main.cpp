// dualpath: figure data, single-point evaluators and the cross-validation
// suite for the distance- and azimuth-dependent LoS/NLoS small-cell model.
//
// Exit status: 0 success, 1 validation failure, 2 configuration error,
// 3 unexpected runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dualpath/config.hpp"
#include "dualpath/error.hpp"
#include "dualpath/experiments.hpp"
#include "dualpath/parallel.hpp"
#include "dualpath/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<std::string> blockage;
  std::optional<std::string> assoc;
  std::optional<int> k;
  std::optional<int> k_max;
  std::optional<double> r;
  std::optional<double> theta;
  std::vector<std::string> sets;
};

dualpath::ExperimentConfig build_config(const Overrides& o) {
  using dualpath::ConfigError;
  dualpath::ExperimentConfig cfg =
      o.config_path.empty() ? dualpath::ExperimentConfig{} : dualpath::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.out) cfg.output_path = *o.out;
  if (o.mode) {
    if (*o.mode == "exact") cfg.mode = dualpath::LaplaceMode::exact_angular;
    else if (*o.mode == "bound") cfg.mode = dualpath::LaplaceMode::bessel_bound;
    else throw ConfigError("--mode: expected exact or bound");
  }
  if (o.blockage) {
    const auto m = dualpath::parse_blockage_mode(*o.blockage);
    if (!m) throw ConfigError("--blockage: expected geometric or probabilistic");
    cfg.blockage = *m;
  }
  if (o.assoc) {
    const auto a = dualpath::parse_association_rule(*o.assoc);
    if (!a) throw ConfigError("--assoc: unknown association rule '" + *o.assoc + "'");
    cfg.association = *a;
  }
  if (o.k) cfg.k = *o.k;
  if (o.k_max) cfg.k_max = *o.k_max;
  if (o.r) cfg.r = *o.r;
  if (o.theta) cfg.theta = *o.theta;
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects name=value, got '" + kv + "'");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("--set " + kv + ": value is not a number");
    }
    dualpath::set_parameter(cfg.params, kv.substr(0, eq), value);
  }
  cfg.validate();
  return cfg;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw dualpath::ConfigError("cannot open output file " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage and rate of PPP small cells under distance- and azimuth-dependent "
               "LoS/NLoS blockage"};
  app.set_version_flag("--version", dualpath::library_version());
  app.footer(std::string("Worker threads: set ") + dualpath::kWorkersEnvVar +
             " (default: hardware concurrency). Exit status: 0 ok, 1 validation failure, "
             "2 configuration error, 3 runtime error.");

  std::string subcommand;
  Overrides o;
  app.add_option("subcommand", subcommand,
                 "fig2 | fig3 | fig4 | fig5 | validate | coverage | rate | assoc | los")
      ->required()
      ->check(CLI::IsMember(
          {"fig2", "fig3", "fig4", "fig5", "validate", "coverage", "rate", "assoc", "los"}));
  app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--trials", o.trials, "Monte Carlo trials per cell (0 = subcommand default)");
  app.add_option("--out", o.out, "output path ('-' or empty for stdout)");
  app.add_option("--mode", o.mode, "Laplace transform form: exact | bound");
  app.add_option("--blockage", o.blockage, "simulator blockage: geometric | probabilistic");
  app.add_option("--assoc", o.assoc, "association: table1 | argmax | argmax_fading");
  app.add_option("--k", o.k, "serving index for the coverage command");
  app.add_option("--k-max", o.k_max, "association truncation for rate and assoc");
  app.add_option("--r", o.r, "link distance in m for the los command");
  app.add_option("--theta", o.theta, "link azimuth in rad for the los command");
  app.add_option("--set", o.sets, "parameter override name=value (suffix _db for dB)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kExitConfig;
  }

  try {
    const dualpath::ExperimentConfig cfg = build_config(o);
    if (subcommand == "validate") {
      const dualpath::ValidationReport report = dualpath::run_validate(cfg);
      emit(report.text(), cfg.output_path);
      return report.passed ? kExitOk : kExitValidation;
    }
    const dualpath::ExperimentOutput result = dualpath::run_experiment(subcommand, cfg);
    emit(dualpath::render_csv(dualpath::csv_metadata(result, cfg), result.table),
         cfg.output_path);
    if (!result.clean)
      std::cerr << "dualpath: some cells are flagged; see the status column\n";
    return kExitOk;
  } catch (const dualpath::ConfigError& e) {
    std::cerr << "dualpath: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dualpath::ParameterError& e) {
    std::cerr << "dualpath: invalid parameter: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dualpath::DomainError& e) {
    // Parameters outside the model's domain are an input error, not a crash.
    std::cerr << "dualpath: parameters outside the model domain: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "dualpath: error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
