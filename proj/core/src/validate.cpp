#include "dualpath/validate.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "dualpath/analysis.hpp"
#include "dualpath/experiments.hpp"
#include "dualpath/pathloss.hpp"
#include "dualpath/rng.hpp"

namespace dualpath {

namespace {

constexpr std::size_t kDefaultValidationTrials = 100'000;
constexpr double kSigmas = 3.0;

// Stream tags keep the checks' random numbers disjoint.
enum : std::uint64_t {
  kTagLosLaw = 0xC01,
  kTagLaplace = 0xC03,
  kTagAssociation = 0xC08,
  kTagEndToEnd = 0xE2E,
  kTagAllLos = 0x501,
};

// The four (r_k, s) points: r_k in {200, 400}, s = T r_k^alpha for both exponents.
struct LaplacePoint {
  double r_k;
  double s;
  const char* exponent;
};

std::vector<LaplacePoint> laplace_grid(const NetworkParams& p) {
  std::vector<LaplacePoint> out;
  for (double r_k : {200.0, 400.0}) {
    out.push_back({r_k, p.sir_threshold * std::pow(r_k, p.alpha_los), "aL"});
    out.push_back({r_k, p.sir_threshold * std::pow(r_k, p.alpha_nlos), "aN"});
  }
  return out;
}

// Power series of I0, independent of the library's implementation.
double i0_series(double x) {
  double term = 1.0;
  double sum = 1.0;
  const double q = 0.25 * x * x;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
  }
  return sum;
}

CheckOutcome check_los_law(ValidationContext& ctx) {
  const NetworkParams& p = ctx.config().params;
  const std::size_t draws = ctx.trials();
  RngStream rng = make_stream(cell_seed(ctx.config().seed, kTagLosLaw), 0);
  double worst_los = 0.0;
  double worst_count = 0.0;
  double worst_los_r = 0.0;
  double worst_count_r = 0.0;
  bool passed = true;
  for (int i = 0; i < 20; ++i) {
    const double r = 10.0 + 990.0 * uniform01(rng);
    const double theta = kTwoPi * uniform01(rng);
    const LinkLosEstimate e =
        estimate_link_los(p, r, theta, draws, cell_seed(ctx.config().seed, kTagLosLaw + 1 + i));
    const double se_los = std::sqrt(e.expected_los * (1.0 - e.expected_los) / draws);
    const double z_los = se_los > 0.0 ? std::abs(e.los_frequency - e.expected_los) / se_los
                                      : (e.los_frequency == e.expected_los ? 0.0 : INFINITY);
    const double z_count = e.count_std_error > 0.0
                               ? std::abs(e.mean_count - e.expected_count) / e.count_std_error
                               : (e.mean_count == e.expected_count ? 0.0 : INFINITY);
    if (z_los > worst_los) {
      worst_los = z_los;
      worst_los_r = r;
    }
    if (z_count > worst_count) {
      worst_count = z_count;
      worst_count_r = r;
    }
    passed = passed && z_los <= kSigmas && z_count <= kSigmas;
  }
  return {passed, fmt::format("20 links x {} field draws; max |z| LoS {:.3f} (r={:.1f} m), "
                              "count {:.3f} (r={:.1f} m); limit {}",
                              draws, worst_los, worst_los_r, worst_count, worst_count_r, kSigmas)};
}

CheckOutcome check_bessel(ValidationContext& ctx) {
  const NetworkParams& p = ctx.config().params;
  bool passed = true;
  std::string detail;
  for (double r : {1.0, 10.0, 100.0, 1000.0}) {
    const QuadratureResult q = q_integral(r, p);
    const double bound = q_bessel_bound(r, p);
    passed = passed && q.converged && q.value <= bound;
    detail += fmt::format("Q({:g})={:.6g}<=bound {:.6g}; ", r, q.value, bound);
  }
  const double q0 = q_integral(0.0, p).value;
  const double b0 = q_bessel_bound(0.0, p);
  const double eq = std::abs(q0 - b0);
  passed = passed && eq <= 1e-10;
  detail += fmt::format("|Q(0)-bound(0)|={:.2e}; ", eq);
  double i0_err = 0.0;
  for (double x : {0.0, 1.0, 2.0}) i0_err = std::max(i0_err, std::abs(bessel_i0(x) - i0_series(x)));
  passed = passed && i0_err <= 1e-9;
  detail += fmt::format("max |I0 - series| on {{0,1,2}} = {:.2e}", i0_err);
  return {passed, detail};
}

CheckOutcome check_laplace_mc(ValidationContext& ctx) {
  const NetworkParams& p = ctx.config().params;
  bool passed = true;
  std::string detail = fmt::format("{} trials, conditional MC; ", ctx.trials());
  std::uint64_t tag = kTagLaplace;
  for (const LaplacePoint& pt : laplace_grid(p)) {
    const LaplaceResult exact = laplace_interference(pt.s, pt.r_k, p);
    const LaplaceMcEstimate mc =
        estimate_laplace_mc(p, pt.s, pt.r_k, ctx.trials(), cell_seed(ctx.config().seed, ++tag),
                            LaplaceMcMethod::conditional);
    const double z = std::abs(exact.value - mc.value) / mc.std_error;
    passed = passed && exact.converged && z <= kSigmas;
    detail += fmt::format("(r={:g},{}) exact {:.8g} mc {:.8g} se {:.2e} z {:.2f}; ", pt.r_k,
                          pt.exponent, exact.value, mc.value, mc.std_error, z);
  }
  detail.resize(detail.size() - 2);
  return {passed, detail};
}

CheckOutcome check_bound_order(ValidationContext& ctx) {
  const NetworkParams& p = ctx.config().params;
  bool passed = true;
  std::string detail;
  for (const LaplacePoint& pt : laplace_grid(p)) {
    const LaplaceResult exact = laplace_interference(pt.s, pt.r_k, p);
    const LaplaceResult bound =
        laplace_interference(pt.s, pt.r_k, p, LaplaceMode::bessel_bound);
    passed = passed && bound.value >= exact.value;
    detail += fmt::format("(r={:g},{}) bound {:.6g}{} exact {:.6g}; ", pt.r_k, pt.exponent,
                          bound.value, bound.diverged ? " (exponent diverges)" : "",
                          exact.value);
  }
  detail.resize(detail.size() - 2);
  return {passed, detail};
}

CheckOutcome check_all_nlos(ValidationContext& ctx) {
  NetworkParams p = ctx.config().params;
  p.lambda_c = 1e3;
  p.alpha_nlos = 4.0;
  const CoverageResult c = coverage_probability(1, 1.0, p);
  const double oracle = 1.0 / (1.0 + kPi / 4.0);
  const double d = std::abs(c.probability - oracle);
  return {d <= 0.01 && c.quadrature.converged,
          fmt::format("coverage {:.6f} vs 1/(1+pi/4) = {:.6f}, |d| = {:.2e}, limit 0.01",
                      c.probability, oracle, d)};
}

CheckOutcome check_coverage_mc(ValidationContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  const MixtureCoverage a = associated_coverage(cfg.params.sir_threshold, cfg.params, 5,
                                                LaplaceMode::exact_angular, cfg.assoc_samples,
                                                cell_seed(cfg.seed, kTagAssociation));
  const Estimate mc = ctx.end_to_end().coverage[0];
  const double d = std::abs(a.value - mc.value);
  return {d <= 0.02 && a.converged,
          fmt::format("analytic {:.5f} (tail {:.2e}) vs MC {:.5f} +/- {:.5f} ({} trials), "
                      "|d| = {:.5f}, limit 0.02",
                      a.value, a.tail_mass, mc.value, mc.half_width, ctx.trials(), d)};
}

CheckOutcome check_sir_density(ValidationContext& ctx) {
  const NetworkParams& p = ctx.config().params;
  double worst = 0.0;
  for (double t : {0.1, 0.316, 1.0, 3.16}) {
    const DensityResult f = sir_pdf(1, t, p);
    const double fd = sir_pdf_finite_difference(1, t, p);
    worst = std::max(worst, std::abs(f.value - fd));
  }
  const RateResult mass = sir_pdf_total_mass(1, p);
  const double mass_err = std::abs(mass.value - 1.0);
  return {worst <= 1e-4 && mass_err <= 1e-3,
          fmt::format("max |pdf - finite difference| = {:.2e} (limit 1e-4); "
                      "|int pdf - 1| = {:.2e} (limit 1e-3)",
                      worst, mass_err)};
}

CheckOutcome check_rate(ValidationContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  const RateResult ccdf = conditional_rate(1, cfg.params);
  const RateResult pdf = conditional_rate_pdf_path(1, cfg.params);
  const double rel_paths = std::abs(ccdf.value - pdf.value) / std::abs(ccdf.value);
  const AverageRateResult avg = average_rate(cfg.params, 5, LaplaceMode::exact_angular,
                                             cfg.assoc_samples,
                                             cell_seed(cfg.seed, kTagAssociation));
  const Estimate mc = ctx.end_to_end().mean_rate;
  const double rel_mc = std::abs(avg.value - mc.value) / std::abs(mc.value);
  return {rel_paths <= 0.01 && rel_mc <= 0.03 && avg.converged,
          fmt::format("k=1 ccdf path {:.6f} vs pdf path {:.6f}, rel {:.2e} (limit 1e-2); "
                      "average {:.5f} vs MC {:.5f} +/- {:.5f}, rel {:.2e} (limit 3e-2)",
                      ccdf.value, pdf.value, rel_paths, avg.value, mc.value, mc.half_width,
                      rel_mc)};
}

CheckOutcome check_association(ValidationContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  const AssociationDistribution a = association_distribution(
      5, cfg.params, cfg.assoc_samples, cell_seed(cfg.seed, kTagAssociation));
  const SimulationSummary& sim = ctx.end_to_end();
  bool passed = true;
  std::string detail;
  for (std::size_t k = 0; k < 3; ++k) {
    const double se = std::hypot(a.std_errors[k], sim.association_std_errors[k]);
    const double d = std::abs(a.probs[k] - sim.association_hist[k]);
    const bool ok = d <= kSigmas * se;
    passed = passed && ok;
    detail += fmt::format("p{} analytic {:.5f} sim {:.5f} |d|/se {}; ", k + 1, a.probs[k],
                          sim.association_hist[k],
                          se > 0.0 ? fmt::format("{:.2f}", d / se) : (ok ? "0 (exact)" : "inf"));
  }
  const double closure = std::abs(a.closure_residual);
  passed = passed && closure <= 0.005;
  detail += fmt::format("|sum p1..p5 + tail - 1| = {:.2e} (limit 5e-3); ", closure);
  NetworkParams p = cfg.params;
  p.lambda_c = 0.0;
  const double p_los = association_probability(1, p).value;
  p.lambda_c = 1e3;
  const double p_nlos = association_probability(1, p).value;
  passed = passed && p_los == 1.0 && p_nlos == 1.0;
  detail += fmt::format("p1(lambda_c=0) = {}, p1(lambda_c=1e3) = {}", p_los, p_nlos);
  return {passed, detail};
}

CheckOutcome check_all_los_delta(ValidationContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  TrialConfig t;
  t.params = cfg.params;
  t.params.lambda_c = 0.0;
  t.params.alpha_los = 3.0;
  t.trials = std::min<std::size_t>(ctx.trials(), 20'000);
  t.master_seed = cell_seed(cfg.seed, kTagAllLos);
  t.blockage_mode = cfg.blockage;
  t.association = AssociationRule::table1;
  const SimulationSummary s = simulate(t, {});
  const double p1 = association_probability(1, t.params).value;
  return {s.association_hist[0] == 1.0 && p1 == 1.0,
          fmt::format("lambda_c=0, alpha_los=3: simulated k=1 frequency {} over {} trials, "
                      "analytic p1 {}",
                      s.association_hist[0], t.trials, p1)};
}

}  // namespace

ValidationContext::ValidationContext(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::size_t ValidationContext::trials() const {
  return config_.trials > 0 ? config_.trials : kDefaultValidationTrials;
}

const SimulationSummary& ValidationContext::end_to_end() {
  if (!end_to_end_) {
    TrialConfig t;
    t.params = config_.params;
    t.trials = trials();
    t.master_seed = cell_seed(config_.seed, kTagEndToEnd);
    t.blockage_mode = config_.blockage;
    t.association = config_.association;
    const double thr[] = {config_.params.sir_threshold};
    end_to_end_ = simulate(t, thr);
  }
  return *end_to_end_;
}

const std::vector<ValidationCheck>& validation_checks() {
  static const std::vector<ValidationCheck> checks{
      {"c01_los_law", "geometric LoS frequency and blockage count vs the Boolean-model law",
       check_los_law},
      {"c02_bessel", "angular integral against its Bessel bound, I0 against its series",
       check_bessel},
      {"c03a_laplace_mc", "interference Laplace transform vs Monte Carlo", check_laplace_mc},
      {"c03b_bound_order", "Bessel form >= exact angular form of the Laplace transform",
       check_bound_order},
      {"c04_all_nlos_oracle", "all-NLoS alpha=4 coverage vs closed form", check_all_nlos},
      {"c05_coverage_mc", "association-weighted coverage vs end-to-end Monte Carlo",
       check_coverage_mc},
      {"c06_sir_density", "SIR density: analytic derivative vs finite difference, unit mass",
       check_sir_density},
      {"c07_rate", "rate: CCDF path vs pdf path, average rate vs Monte Carlo", check_rate},
      {"c08_association", "association probabilities vs the nearest-first simulator",
       check_association},
      {"s01_all_los_delta", "all-LoS network always serves the nearest BS", check_all_los_delta},
  };
  return checks;
}

std::optional<CheckOutcome> run_check(std::string_view id, ValidationContext& context) {
  for (const ValidationCheck& c : validation_checks())
    if (c.id == id) return c.run(context);
  return std::nullopt;
}

std::string format_check_line(const ValidationCheck& check, const CheckOutcome& outcome) {
  return fmt::format("{} {} {}: {}", outcome.passed ? "PASS" : "FAIL", check.id, check.title,
                     outcome.detail);
}

std::string ValidationReport::text() const {
  std::string out;
  for (const std::string& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

ValidationReport run_validate(const ExperimentConfig& config) {
  ValidationContext ctx(config);
  ValidationReport report;
  for (const ValidationCheck& c : validation_checks()) {
    const CheckOutcome outcome = c.run(ctx);
    report.passed = report.passed && outcome.passed;
    report.lines.push_back(format_check_line(c, outcome));
  }
  return report;
}

}  // namespace dualpath
