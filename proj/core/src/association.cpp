#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "dualpath/analysis.hpp"
#include "dualpath/error.hpp"
#include "dualpath/parallel.hpp"
#include "dualpath/pathloss.hpp"
#include "dualpath/rng.hpp"

namespace dualpath {

namespace {

constexpr std::size_t kBlock = 4096;

void check_association_params(const NetworkParams& params, int k) {
  params.validate();
  if (k < 1) throw ParameterError("association index k must be >= 1");
  if (params.lambda_b == 0.0) throw DomainError("association needs lambda_b > 0");
}

// Every link shares one state, so received power falls with distance and the
// nearest BS is always the first local maximum.
bool single_state(const NetworkParams& p) {
  return p.lambda_c == 0.0 || std::exp(-p.lambda_c * p.width * p.length) == 0.0;
}

// Per-sample selection probabilities for indices 1..k_max plus the remainder,
// with the LoS/NLoS states summed out. `rho` holds the first k_max + 1
// normalized squared distances.
void select_probabilities(std::span<const double> rho, const NetworkParams& p,
                          const AngularProfile& profile, std::span<double> out) {
  const std::size_t k_max = out.size() - 1;
  const double prefactor = std::exp(-p.lambda_c * p.width * p.length);
  const double diag = p.diagonal_length();
  auto state = [&](std::size_t i, double& los, std::array<double, 2>& power) {
    const double log_r = 0.5 * std::log(rho[i] / (kPi * p.lambda_b));
    los = prefactor * profile.g(p.lambda_c * std::exp(log_r) * diag) / kTwoPi;
    power = {-p.alpha_nlos * log_r, -p.alpha_los * log_r};  // {nlos, los}
  };

  double los = 0.0;
  std::array<double, 2> power{};
  state(0, los, power);
  std::array<double, 2> alive{1.0 - los, los};  // Pr(increasing so far, state)
  for (std::size_t k = 0; k < k_max; ++k) {
    double next_los = 0.0;
    std::array<double, 2> next_power{};
    state(k + 1, next_los, next_power);
    const std::array<double, 2> next_prob{1.0 - next_los, next_los};
    std::array<double, 2> next_alive{0.0, 0.0};
    double selected = 0.0;
    for (int s = 0; s < 2; ++s) {
      for (int t = 0; t < 2; ++t) {
        const double w = alive[s] * next_prob[t];
        if (power[s] >= next_power[t]) {
          selected += w;
        } else {
          next_alive[t] += w;
        }
      }
    }
    out[k] = selected;
    alive = next_alive;
    power = next_power;
  }
  out[k_max] = alive[0] + alive[1];
}

QuadratureResult first_association_quadrature(const NetworkParams& p) {
  const auto profile = AngularProfile::shared(p.length, p.width);
  auto q_bar = [&](double rho) {
    const double r = std::sqrt(rho / (kPi * p.lambda_b));
    return profile->q(p.lambda_c, r) / kTwoPi;
  };
  const double ratio_nl = p.alpha_los / p.alpha_nlos;
  const double ratio_ln = p.alpha_nlos / p.alpha_los;
  const QuadratureSpec spec{1e-10, 1e-10, 2'000'000};
  const QuadratureSpec inner = spec.inner();

  // (rho1, rho2) has density exp(-rho2) on 0 < rho1 < rho2.
  auto outer = [&](double rho2) -> IntegrandValue {
    if (rho2 <= 0.0) return {0.0, 0.0, true};
    const double r2 = std::sqrt(rho2 / (kPi * p.lambda_b));
    const double q2 = q_bar(rho2);
    // NLoS nearest beats LoS second iff rho1 <= c_nl; LoS nearest beats NLoS
    // second iff rho1 <= c_ln.
    const double c_nl = kPi * p.lambda_b * std::pow(r2, 2.0 * ratio_nl);
    const double c_ln = kPi * p.lambda_b * std::pow(r2, 2.0 * ratio_ln);
    std::vector<double> pts{0.0, std::clamp(c_nl, 0.0, rho2), std::clamp(c_ln, 0.0, rho2), rho2};
    std::sort(pts.begin(), pts.end());
    QuadratureResult total;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (!(pts[i + 1] > pts[i])) continue;
      const double mid = 0.5 * (pts[i] + pts[i + 1]);
      const double w_nl = mid <= c_nl ? 1.0 : 0.0;
      const double w_ln = mid <= c_ln ? 1.0 : 0.0;
      auto f = [&](double rho1) {
        const double q1 = q_bar(rho1);
        return (1.0 - q1) * (1.0 - q2) + q1 * q2 + (1.0 - q1) * q2 * w_nl + q1 * (1.0 - q2) * w_ln;
      };
      total += integrate_finite(f, pts[i], pts[i + 1], inner);
    }
    const double e = std::exp(-rho2);
    return {total.value * e, total.error_estimate * e, total.converged};
  };
  // rho2 exp(-rho2) is below 1e-14 past 40.
  const std::array<double, 5> pts{0.0, 1.0, 4.0, 12.0, 40.0};
  return integrate_points(outer, pts, spec);
}

}  // namespace

AssociationMc association_monte_carlo(int k_max, const NetworkParams& params, std::size_t samples,
                                      std::uint64_t seed) {
  check_association_params(params, k_max);
  if (samples < 2) throw ParameterError("association Monte Carlo needs >= 2 samples");
  const auto profile = AngularProfile::shared(params.length, params.width);
  const std::size_t width = static_cast<std::size_t>(k_max) + 1;
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;

  // Per block: sums then sums of squares, each of `width` entries.
  std::vector<std::vector<double>> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    RngStream rng = make_stream(seed, b);
    const std::size_t n = std::min(kBlock, samples - b * kBlock);
    std::vector<double> acc(2 * width, 0.0);
    std::vector<double> rho(width);
    std::vector<double> sel(width);
    for (std::size_t i = 0; i < n; ++i) {
      double cum = 0.0;
      for (double& x : rho) {
        cum += unit_exponential(rng);
        x = cum;
      }
      select_probabilities(rho, params, *profile, sel);
      for (std::size_t j = 0; j < width; ++j) {
        acc[j] += sel[j];
        acc[width + j] += sel[j] * sel[j];
      }
    }
    partial[b] = std::move(acc);
  });

  std::vector<double> sum(2 * width, 0.0);
  for (const auto& acc : partial)
    for (std::size_t j = 0; j < 2 * width; ++j) sum[j] += acc[j];

  const double n = static_cast<double>(samples);
  AssociationMc out;
  for (std::size_t j = 0; j < width; ++j) {
    const double mean = sum[j] / n;
    const double var = std::max(0.0, (sum[width + j] / n - mean * mean) * n / (n - 1.0));
    const double se = std::sqrt(var / n);
    if (j + 1 < width) {
      out.probs.push_back(mean);
      out.std_errors.push_back(se);
    } else {
      out.tail = mean;
      out.tail_std_error = se;
    }
  }
  if (single_state(params)) {
    std::fill(out.probs.begin(), out.probs.end(), 0.0);
    std::fill(out.std_errors.begin(), out.std_errors.end(), 0.0);
    out.probs[0] = 1.0;
    out.tail = 0.0;
    out.tail_std_error = 0.0;
  }
  return out;
}

AssociationEstimate association_probability(int k, const NetworkParams& params,
                                            std::size_t mc_samples, std::uint64_t seed) {
  check_association_params(params, k);
  AssociationEstimate out;
  out.k = k;
  if (single_state(params)) {
    out.value = k == 1 ? 1.0 : 0.0;
    return out;
  }
  if (k == 1) {
    out.quadrature = first_association_quadrature(params);
    out.value = out.quadrature.value;
    return out;
  }
  const AssociationMc mc = association_monte_carlo(k, params, mc_samples, seed);
  out.value = mc.probs[static_cast<std::size_t>(k) - 1];
  out.std_error = mc.std_errors[static_cast<std::size_t>(k) - 1];
  return out;
}

AssociationDistribution association_distribution(int k_max, const NetworkParams& params,
                                                 std::size_t mc_samples, std::uint64_t seed) {
  check_association_params(params, k_max);
  AssociationDistribution out;
  const AssociationMc mc = association_monte_carlo(k_max, params, mc_samples, seed);
  out.probs = mc.probs;
  out.std_errors = mc.std_errors;
  out.probs[0] = association_probability(1, params, mc_samples, seed).value;
  out.std_errors[0] = 0.0;
  double sum = 0.0;
  for (double v : out.probs) sum += v;
  out.tail_mass = 1.0 - sum;
  out.tail_independent = mc.tail;
  out.closure_residual = sum + mc.tail - 1.0;
  return out;
}

namespace {

// Looser per-term tolerance for terms with small association weight.
QuadratureSpec weighted_spec(const QuadratureSpec& spec, double weight) {
  const double f = std::min(100.0, 1.0 / std::max(weight, 1e-300));
  return {spec.abs_tol * f, spec.rel_tol * f, spec.max_evals};
}

}  // namespace

AverageRateResult average_rate(const NetworkParams& params, int k_max, LaplaceMode mode,
                               std::size_t mc_samples, std::uint64_t seed,
                               const QuadratureSpec& spec) {
  check_association_params(params, k_max);
  AverageRateResult out;
  out.association = association_distribution(k_max, params, mc_samples, seed);
  out.tail_mass = out.association.tail_mass;
  out.tail_warning = out.tail_mass >= kTailWarning;
  for (int k = 1; k <= k_max; ++k) {
    const double w = out.association.probs[static_cast<std::size_t>(k) - 1];
    if (w <= 0.0) {
      out.conditional_rates.push_back(0.0);
      continue;
    }
    const RateResult r = conditional_rate(k, params, mode, weighted_spec(spec, w));
    out.conditional_rates.push_back(r.value);
    out.value += w * r.value;
    out.converged = out.converged && r.quadrature.converged;
  }
  return out;
}

MixtureCoverage associated_coverage(double threshold, const NetworkParams& params, int k_max,
                                    LaplaceMode mode, std::size_t mc_samples, std::uint64_t seed,
                                    const QuadratureSpec& spec) {
  check_association_params(params, k_max);
  MixtureCoverage out;
  out.association = association_distribution(k_max, params, mc_samples, seed);
  out.tail_mass = out.association.tail_mass;
  for (int k = 1; k <= k_max; ++k) {
    const double w = out.association.probs[static_cast<std::size_t>(k) - 1];
    if (w <= 0.0) {
      out.per_k.push_back(0.0);
      continue;
    }
    const CoverageResult c = coverage_probability(k, threshold, params, mode, weighted_spec(spec, w));
    out.per_k.push_back(c.probability);
    out.value += w * c.probability;
    out.converged = out.converged && c.quadrature.converged;
  }
  return out;
}

}  // namespace dualpath
