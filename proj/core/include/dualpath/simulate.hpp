#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualpath/params.hpp"
#include "dualpath/pathloss.hpp"

namespace dualpath {

/// geometric: sample the rectangles and test every link against them.
/// probabilistic: independent Bernoulli LoS per link with the exact
/// single-link law, mirroring the analysis.
enum class BlockageMode { geometric, probabilistic };

/// table1: nearest-first, stop at the first local maximum of r^-alpha.
/// argmax_no_fading / argmax_with_fading: global maximum of r^-alpha (times h).
/// nearest_k: always the k-th nearest BS, interference from farther BSs only;
/// reproduces the conditioning of the per-k coverage expression.
enum class AssociationRule { table1, argmax_no_fading, argmax_with_fading, nearest_k };

const char* to_string(BlockageMode mode);
const char* to_string(AssociationRule rule);
std::optional<BlockageMode> parse_blockage_mode(std::string_view text);
/// Accepts "argmax" as argmax_no_fading.
std::optional<AssociationRule> parse_association_rule(std::string_view text);

struct TrialConfig {
  NetworkParams params;
  std::size_t trials = 10'000;
  std::uint64_t master_seed = 1;
  BlockageMode blockage_mode = BlockageMode::probabilistic;
  AssociationRule association = AssociationRule::table1;
  double region_radius = 0.0;  ///< 0 selects default_region_radius(params)
  int k_track = 8;
  int forced_k = 1;            ///< serving index for AssociationRule::nearest_k
  bool random_orientation = false;

  void validate() const;
  double effective_region_radius() const;
};

/// Disc radius holding 64 BSs on average: 8 / sqrt(pi lambda_b).
double default_region_radius(const NetworkParams& params);

struct SirSample {
  double sir_linear = 0.0;
  int serving_k = 1;
  LinkState serving_state;
  int table1_k = 1;
  int argmax_k = 1;        ///< argmax without fading
  bool fallback = false;   ///< table1 found no local maximum inside the region
  std::uint32_t resamples = 0;
};

/// One realization for trial `trial_index`; depends only on
/// (cfg, master_seed, trial_index).
SirSample run_trial(const TrialConfig& cfg, std::size_t trial_index);

/// Link as seen by the association rules.
struct LinkPower {
  double r = 0.0;
  double alpha = 0.0;
};

/// 1-based index of the first local maximum of r^-alpha along the
/// distance-ordered links; the global maximum when the sequence keeps rising
/// to the last link (`fallback` set).
int associate_table1(std::span<const LinkPower> links, bool* fallback = nullptr);

/// 1-based index of the global maximum of r^-alpha, times fading[i] if given.
int associate_argmax(std::span<const LinkPower> links, std::span<const double> fading = {});

struct Estimate {
  double value = 0.0;
  double half_width = 0.0;  ///< 95% normal approximation
};

struct RadialLosBin {
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::uint64_t links = 0;
  double los_frequency = 0.0;
  double half_width = 0.0;
  double predicted = 0.0;  ///< area-weighted mean of Q(r) / 2 pi over the annulus
};

struct SimulationSummary {
  std::size_t trials = 0;
  std::vector<double> thresholds;
  std::vector<Estimate> coverage;
  std::vector<Estimate> coverage_tracked;  ///< among trials with serving_k <= k_track
  Estimate mean_rate;
  /// Frequencies of serving_k = 1..k_track, last entry k > k_track; sums to 1.
  std::vector<double> association_hist;
  std::vector<double> association_std_errors;
  double disagreement_rate = 0.0;  ///< table1 != argmax_no_fading
  double serving_los_fraction = 0.0;
  std::vector<RadialLosBin> los_by_bin;
  std::uint64_t resamples = 0;
  std::uint64_t fallbacks = 0;
};

inline constexpr int kRadialBins = 10;

/// All statistics over cfg.trials trials. Bit-identical for fixed cfg
/// regardless of the worker count.
SimulationSummary simulate(const TrialConfig& cfg, std::span<const double> thresholds);

Estimate estimate_coverage(const TrialConfig& cfg, double threshold);
Estimate estimate_rate(const TrialConfig& cfg);
/// serving_k frequencies (see SimulationSummary::association_hist).
std::vector<double> estimate_association(const TrialConfig& cfg);

struct LinkLosEstimate {
  std::size_t draws = 0;
  double los_frequency = 0.0;
  double los_std_error = 0.0;
  double mean_count = 0.0;
  double count_std_error = 0.0;
  double expected_count = 0.0;  ///< model mean count
  double expected_los = 0.0;    ///< model LoS probability
};

/// Blockage-field draws around a single link to (r, theta): LoS frequency and
/// blocking count against the model.
LinkLosEstimate estimate_link_los(const NetworkParams& params, double r, double theta,
                                  std::size_t draws, std::uint64_t seed);

struct LaplaceMcEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

/// full: draw positions, LoS states and fading, average exp(-s I).
/// conditional: draw positions only and average
/// prod_i E[exp(-s h_i g_i) | position_i], which is exact per BS. Same mean;
/// the standard error stays honest when the value hinges on rare LoS
/// interferers that the full estimator may never sample.
enum class LaplaceMcMethod { full, conditional };

/// E[exp(-s I)] for the interference from BSs beyond r_k, probabilistic
/// blockage, Rayleigh fading.
LaplaceMcEstimate estimate_laplace_mc(const NetworkParams& params, double s, double r_k,
                                      std::size_t trials, std::uint64_t seed,
                                      LaplaceMcMethod method = LaplaceMcMethod::full);

}  // namespace dualpath
