#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dualpath/analysis.hpp"
#include "dualpath/params.hpp"
#include "dualpath/simulate.hpp"

namespace dualpath {

/// One named parameter axis; values are linear (a "_db" key is converted on
/// parse).
struct SweepAxis {
  std::string name;
  std::vector<double> values;

  bool operator==(const SweepAxis&) const = default;
};

/// Everything a subcommand needs. Parsed from a JSON document:
///
///   {"params": {"lambda_b": 5e-7, "sir_threshold_db": -5, ...},
///    "sweep": {"lambda_c": [0.0005, 0.001]},
///    "seed": 1, "trials": 20000, "mode": "exact",
///    "blockage": "probabilistic", "assoc": "table1", "out": "fig2.csv"}
///
/// Every key is optional; unknown keys are rejected.
struct ExperimentConfig {
  NetworkParams params;
  std::vector<SweepAxis> sweep;  ///< cartesian product, first axis slowest
  std::string output_path;       ///< empty writes to stdout
  std::uint64_t seed = 1;
  std::size_t trials = 0;        ///< Monte Carlo trials per cell; 0 = subcommand default
  LaplaceMode mode = LaplaceMode::exact_angular;
  BlockageMode blockage = BlockageMode::probabilistic;
  AssociationRule association = AssociationRule::table1;
  int k = 1;                     ///< serving index for single-point commands
  int k_max = 5;                 ///< association truncation
  double r = 100.0;              ///< link distance for the los command, m
  double theta = 0.0;            ///< link azimuth for the los command, rad
  std::size_t assoc_samples = kAssociationSamples;

  /// Throws ConfigError on any invariant violation (including invalid params).
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parameter keys accepted in "params" and "sweep" (each also with "_db").
const std::vector<std::string>& parameter_names();

/// Sets a NetworkParams field by key; "<name>_db" takes a dB value.
/// Throws ConfigError for unknown names.
void set_parameter(NetworkParams& params, std::string_view name, double value);
double get_parameter(const NetworkParams& params, std::string_view name);

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (linear units, every field present, fixed key order).
/// parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a 64 of serialize_config with the output path cleared, as 16 hex
/// digits; identical for reruns that only change where the output goes.
std::string config_digest(const ExperimentConfig& config);

/// Expands the sweep into one parameter set per grid point, in row-major
/// order. An empty sweep yields {config.params}.
std::vector<NetworkParams> sweep_points(const ExperimentConfig& config);

}  // namespace dualpath
