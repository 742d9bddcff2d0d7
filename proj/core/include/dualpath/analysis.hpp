#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dualpath/params.hpp"
#include "dualpath/quadrature.hpp"

namespace dualpath {

/// How the azimuth integral inside the interference Laplace transform is
/// evaluated: with the exact |sin|/|cos| blockage count, or with the absolute
/// values dropped, which turns the azimuth integral into a Bessel I0.
enum class LaplaceMode { exact_angular, bessel_bound };

const char* to_string(LaplaceMode mode);

/// Default tolerances for probabilities and transforms.
inline constexpr QuadratureSpec kAnalysisSpec{1e-7, 1e-6, 2'000'000};
/// Default tolerances for rates (bits/s/Hz).
inline constexpr QuadratureSpec kRateSpec{1e-5, 1e-5, 2'000'000};

/// Density of the distance to the k-th nearest point of a PPP of intensity
/// lambda_b. Uses lgamma for (k-1)!.
double nearest_k_pdf(double r, int k, double lambda_b);

struct LaplaceResult {
  double value = 1.0;     ///< E[exp(-s I)]
  double exponent = 0.0;  ///< -log(value)
  double error_estimate = 0.0;  ///< absolute error of `exponent`
  bool converged = true;
  /// The exponent integral is infinite (value reported as 0). Happens for the
  /// Bessel form whenever lambda_c > 0: I0 grows exponentially in r while the
  /// LoS weight only decays like r^-alpha_los.
  bool diverged = false;
};

/// Laplace transform of the interference from BSs beyond r_k, via the PGFL of
/// the PPP with independent LoS/NLoS states and unit-mean Rayleigh fading.
/// Throws DomainError for lambda_c = 0 with alpha_los <= 2 (divergent).
LaplaceResult laplace_interference(double s, double r_k, const NetworkParams& params,
                                   LaplaceMode mode = LaplaceMode::exact_angular,
                                   const QuadratureSpec& spec = kAnalysisSpec);

/// d/ds of the Laplace transform (closed-form derivative under the integral).
struct LaplaceDerivative {
  double value = 0.0;  ///< dL/ds (<= 0)
  double laplace = 1.0;
  double error_estimate = 0.0;
  bool converged = true;
  bool diverged = false;
};
LaplaceDerivative laplace_interference_derivative(double s, double r_k,
                                                  const NetworkParams& params,
                                                  LaplaceMode mode = LaplaceMode::exact_angular,
                                                  const QuadratureSpec& spec = kAnalysisSpec);

/// Same transform evaluated directly as the (theta, r) double integral with the
/// raw |sin|/|cos| integrand through integrate_2d. Slow reference route used to
/// check the reduced one-dimensional form.
LaplaceResult laplace_interference_direct_2d(double s, double r_k, const NetworkParams& params,
                                             const QuadratureSpec& spec = kAnalysisSpec);

/// lambda_b * int_{r_k}^{r_max} int_0^{2 pi} (...) r dtheta dr: the exponent
/// restricted to a finite annulus. Diagnostic for the growth of the Bessel form.
QuadratureResult laplace_exponent_truncated(double s, double r_k, double r_max,
                                            const NetworkParams& params, LaplaceMode mode,
                                            const QuadratureSpec& spec = kAnalysisSpec);

struct CoverageResult {
  int k = 1;
  double threshold = 0.0;
  double probability = 0.0;      ///< clamped to [0, 1]
  double raw_probability = 0.0;  ///< before clamping
  QuadratureResult quadrature;
  bool diverged = false;
};

/// Pr{SIR_k > threshold} with the serving BS at the k-th nearest distance and
/// uniform azimuth, interference from all BSs beyond it.
CoverageResult coverage_probability(int k, double threshold, const NetworkParams& params,
                                    LaplaceMode mode = LaplaceMode::exact_angular,
                                    const QuadratureSpec& spec = kAnalysisSpec);

/// CCDF of SIR_k; identical to coverage_probability.
CoverageResult sir_ccdf(int k, double t, const NetworkParams& params,
                        LaplaceMode mode = LaplaceMode::exact_angular,
                        const QuadratureSpec& spec = kAnalysisSpec);

struct DensityResult {
  double value = 0.0;
  QuadratureResult quadrature;
};

/// Density of SIR_k at t > 0 from the analytic derivative of the Laplace
/// transform inside the distance integral.
DensityResult sir_pdf(int k, double t, const NetworkParams& params,
                      LaplaceMode mode = LaplaceMode::exact_angular,
                      const QuadratureSpec& spec = kAnalysisSpec);

/// Central finite difference of the CCDF, -(p(t+h) - p(t-h)) / 2h, h = rel_step * t.
double sir_pdf_finite_difference(int k, double t, const NetworkParams& params,
                                 LaplaceMode mode = LaplaceMode::exact_angular,
                                 double rel_step = 1e-3);

struct RateResult {
  double value = 0.0;  ///< bits/s/Hz
  QuadratureResult quadrature;
};

/// E[log2(1 + SIR_k)] = (1/ln 2) int_0^inf Pr{SIR_k > e^u - 1} du.
/// Throws DomainError when lambda_b = 0 (no interference, infinite SIR).
RateResult conditional_rate(int k, const NetworkParams& params,
                            LaplaceMode mode = LaplaceMode::exact_angular,
                            const QuadratureSpec& spec = kRateSpec);

/// E[log2(1 + SIR_k)] = int log2(1 + t) f_SIR_k(t) dt with the analytic density.
RateResult conditional_rate_pdf_path(int k, const NetworkParams& params,
                                     LaplaceMode mode = LaplaceMode::exact_angular,
                                     const QuadratureSpec& spec = kRateSpec);

/// int_0^inf f_SIR_k(t) dt, which should be one.
RateResult sir_pdf_total_mass(int k, const NetworkParams& params,
                              LaplaceMode mode = LaplaceMode::exact_angular,
                              const QuadratureSpec& spec = kRateSpec);

// ---------------------------------------------------------------------------
// User association under the nearest-first local-maximum rule.

inline constexpr std::uint64_t kAssociationSeed = 0x5EED'A550'C1A7'10ULL;
inline constexpr std::size_t kAssociationSamples = 400'000;

struct AssociationEstimate {
  int k = 1;
  double value = 0.0;
  double std_error = 0.0;  ///< Monte Carlo standard error (0 for quadrature)
  QuadratureResult quadrature;  ///< populated for k = 1
};

/// Probability that the local-maximum rule selects the k-th nearest BS.
/// k = 1 by quadrature over the joint law of (r1, r2); k >= 2 by Monte Carlo
/// integration over the ordered PPP distances with the LoS/NLoS states
/// averaged out exactly.
AssociationEstimate association_probability(int k, const NetworkParams& params,
                                            std::size_t mc_samples = kAssociationSamples,
                                            std::uint64_t seed = kAssociationSeed);

/// Monte Carlo estimate of all of p^1..p^k_max and of Pr{k > k_max} from one
/// sample set; the k_max + 1 numbers sum to one per sample.
struct AssociationMc {
  std::vector<double> probs;
  std::vector<double> std_errors;
  double tail = 0.0;
  double tail_std_error = 0.0;
};
AssociationMc association_monte_carlo(int k_max, const NetworkParams& params,
                                      std::size_t samples = kAssociationSamples,
                                      std::uint64_t seed = kAssociationSeed);

struct AssociationDistribution {
  std::vector<double> probs;       ///< p^1 (quadrature), p^2.. (Monte Carlo)
  std::vector<double> std_errors;
  double tail_mass = 0.0;          ///< 1 - sum(probs)
  double tail_independent = 0.0;   ///< Pr{k > k_max} estimated directly
  double closure_residual = 0.0;   ///< sum(probs) + tail_independent - 1
};
AssociationDistribution association_distribution(int k_max, const NetworkParams& params,
                                                 std::size_t mc_samples = kAssociationSamples,
                                                 std::uint64_t seed = kAssociationSeed);

/// Truncated association mass at or above which results carry a warning.
inline constexpr double kTailWarning = 0.01;

struct AverageRateResult {
  double value = 0.0;
  double tail_mass = 0.0;
  bool tail_warning = false;  ///< tail_mass >= kTailWarning
  bool converged = true;
  std::vector<double> conditional_rates;
  AssociationDistribution association;
};

/// sum_{k <= k_max} p^k * E[log2(1 + SIR_k)]. Each conditional rate runs at
/// `spec` loosened by 1 / p^k (at most 100x).
AverageRateResult average_rate(const NetworkParams& params, int k_max = 5,
                               LaplaceMode mode = LaplaceMode::exact_angular,
                               std::size_t mc_samples = kAssociationSamples,
                               std::uint64_t seed = kAssociationSeed,
                               const QuadratureSpec& spec = kRateSpec);

struct MixtureCoverage {
  double value = 0.0;
  double tail_mass = 0.0;
  std::vector<double> per_k;
  AssociationDistribution association;
  bool converged = true;
};

/// sum_{k <= k_max} p^k * Pr{SIR_k > threshold}.
MixtureCoverage associated_coverage(double threshold, const NetworkParams& params, int k_max = 5,
                                    LaplaceMode mode = LaplaceMode::exact_angular,
                                    std::size_t mc_samples = kAssociationSamples,
                                    std::uint64_t seed = kAssociationSeed,
                                    const QuadratureSpec& spec = kAnalysisSpec);

}  // namespace dualpath
