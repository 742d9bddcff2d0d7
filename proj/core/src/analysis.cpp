#include "dualpath/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "dualpath/error.hpp"
#include "dualpath/pathloss.hpp"

namespace dualpath {

const char* to_string(LaplaceMode mode) {
  return mode == LaplaceMode::exact_angular ? "exact" : "bound";
}

double nearest_k_pdf(double r, int k, double lambda_b) {
  if (k < 1) throw ParameterError("nearest_k_pdf needs k >= 1");
  if (!(lambda_b > 0.0)) throw ParameterError("nearest_k_pdf needs lambda_b > 0");
  if (!(r >= 0.0)) throw ParameterError("nearest_k_pdf needs r >= 0");
  if (r == 0.0) return 0.0;
  const double a = kPi * lambda_b;
  const double log_f = std::log(2.0) + k * std::log(a) - std::lgamma(static_cast<double>(k)) +
                       (2.0 * k - 1.0) * std::log(r) - a * r * r;
  return std::exp(log_f);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x / (1 + x) without overflow for huge x.
inline double saturate(double x) { return x > 1.0 ? 1.0 / (1.0 + 1.0 / x) : x / (1.0 + x); }

// x / (1 + x)^2 without overflow for huge x.
inline double saturate_slope(double x) {
  if (x > 1.0) {
    const double inv = 1.0 / x;
    return inv / ((1.0 + inv) * (1.0 + inv));
  }
  return x / ((1.0 + x) * (1.0 + x));
}

// F(c) = int_1^inf v c v^-a / (1 + c v^-a) dv and G(c) = c F'(c), with
// d = 2 / a: convergent series for c <= 1/2 and c >= 2, the substitution
// w = v^a / c in between. G = d F + c / (a (1 + c)) holds for every c.
struct PowerTerm {
  double value;
  double log_slope;
};

PowerTerm power_term(double c, double a) {
  constexpr int kTerms = 80;
  const double d = 2.0 / a;
  double f = 0.0;
  if (c <= 0.5) {
    double term = 1.0;
    for (int n = 0; n < kTerms; ++n, term *= -c) f += term / (n + 1.0 - d);
    f *= c / a;
  } else if (c >= 2.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int n = 0; n < kTerms; ++n, term *= -1.0 / c) sum += term / (n + d);
    f = std::exp(d * std::log(c)) / a * kPi / std::sin(kPi * d) - sum / a;
  } else {
    // J(x) = int_x^inf w^(d-1) / (1 + w) dw, F = c^d J(1/c) / a.
    double j2 = 0.0;
    double term = std::pow(2.0, d - 1.0);
    for (int n = 0; n < kTerms; ++n, term *= -0.5) j2 += term / (n + 1.0 - d);
    auto g = [d](double w) { return std::pow(w, d - 1.0) / (1.0 + w); };
    const double mid = integrate_finite(g, 1.0 / c, 2.0, {1e-15, 1e-14, 10'000}).value;
    f = std::pow(c, d) * (j2 + mid) / a;
  }
  return {f, d * f + c / (a * (1.0 + c))};
}

// Azimuth integral of the LoS probability used inside the interference
// exponent, per mode, plus shared model data.
struct Model {
  NetworkParams p;
  LaplaceMode mode;
  std::shared_ptr<const AngularProfile> profile;
  double q_prefactor;  // exp(-lambda_c w l)

  Model(const NetworkParams& params, LaplaceMode m)
      : p(params),
        mode(m),
        profile(AngularProfile::shared(params.length, params.width)),
        q_prefactor(std::exp(-params.lambda_c * params.width * params.length)) {
    p.validate();
  }

  bool all_los() const { return p.lambda_c == 0.0; }
  bool all_nlos() const { return q_prefactor == 0.0; }

  // Exact Q(r) (serving link and exact interference).
  double q_exact(double r) const {
    if (all_los()) return kTwoPi;
    if (all_nlos()) return 0.0;
    return q_prefactor * profile->g(p.lambda_c * r * profile_diag());
  }
  double profile_diag() const { return p.diagonal_length(); }

  double q_interference(double r) const {
    if (mode == LaplaceMode::exact_angular) return q_exact(r);
    return q_bessel_bound(r, p);
  }

  // The Bessel form is infinite as soon as the LoS weight is anything but a
  // constant.
  bool interference_diverges() const {
    return mode == LaplaceMode::bessel_bound && p.lambda_c > 0.0 && !all_nlos();
  }

  void check_all_los_convergence() const {
    if (all_los() && p.alpha_los <= 2.0)
      throw DomainError(
          "all-LoS network (lambda_c = 0) with alpha_los <= 2: the aggregate interference "
          "diverges on the infinite plane");
  }
};

struct ExponentEval {
  double exponent = 0.0;
  double exponent_err = 0.0;
  double log_slope = 0.0;  // s * dE/ds
  double log_slope_err = 0.0;
  bool converged = true;
  bool diverged = false;
};

// E(s) = -log L(s) = lambda_b r_k^2 [ 2 pi F(c_N) + int_1^inf Q(r_k v) b(v) v dv ]
// with x_N = s (r_k v)^-alpha_N, x_L = s (r_k v)^-alpha_L,
// b = x_L / (1 + x_L) - x_N / (1 + x_N).
ExponentEval interference_exponent(double s, double r_k, const Model& m, bool with_slope,
                                   const QuadratureSpec& spec) {
  ExponentEval out;
  if (s == 0.0 || m.p.lambda_b == 0.0) return out;
  m.check_all_los_convergence();
  if (m.interference_diverges()) {
    out.exponent = kInf;
    out.log_slope = kInf;
    out.diverged = true;
    return out;
  }

  const double a_n = m.p.alpha_nlos;
  const double a_l = m.p.alpha_los;
  const double log_rk = std::log(r_k);
  const double c_n = std::exp(std::log(s) - a_n * log_rk);  // s r_k^-alpha_N
  const double c_l = std::exp(std::log(s) - a_l * log_rk);
  const double pref = m.p.lambda_b * r_k * r_k;

  auto los_part = [&](double v) {
    if (!std::isfinite(v)) return 0.0;
    const double q = m.q_interference(r_k * v);
    if (q == 0.0) return 0.0;
    const double x_n = c_n * std::pow(v, -a_n);
    const double x_l = c_l * std::pow(v, -a_l);
    return q * (saturate(x_l) - saturate(x_n)) * v;
  };
  auto los_slope = [&](double v) {
    if (!std::isfinite(v)) return 0.0;
    const double q = m.q_interference(r_k * v);
    if (q == 0.0) return 0.0;
    const double x_n = c_n * std::pow(v, -a_n);
    const double x_l = c_l * std::pow(v, -a_l);
    return q * (saturate_slope(x_l) - saturate_slope(x_n)) * v;
  };

  const QuadratureSpec part_spec{spec.abs_tol / pref, spec.rel_tol, spec.max_evals};

  // Q(r) <= 2 pi exp(-lambda_c min(l, w) r), |b| <= 1: in y = log v the LoS
  // part is smooth up to a cutoff whose neglected tail is bounded in closed
  // form. Without blockages it is a pure power law.
  auto los_integral = [&](auto& part) -> QuadratureResult {
    if (m.all_nlos()) return {};
    if (m.all_los())
      return integrate_semi_infinite(part, 1.0, DecayHint::power, part_spec,
                                     std::max(1.0, std::pow(c_l, 1.0 / a_l)));
    const double len = 1.0 / (m.p.lambda_c * m.p.min_side() * r_k);
    // int_{v0}^inf 2 pi v exp(-v / len) dv = 2 pi len (v0 + len) exp(-v0 / len)
    auto tail = [&](double v0) { return kTwoPi * len * (v0 + len) * std::exp(-v0 / len); };
    double v_max = std::max(2.0, 30.0 * len);
    while (tail(v_max) > 0.01 * part_spec.abs_tol) v_max += 5.0 * len;
    auto in_log = [&](double y) {
      const double v = std::exp(y);
      return part(v) * v;
    };
    QuadratureResult res = integrate_finite(in_log, 0.0, std::log(v_max), part_spec);
    res.error_estimate += tail(v_max);
    return res;
  };

  // The all-azimuth NLoS-exponent part is closed form.
  const PowerTerm base = power_term(c_n, a_n);
  QuadratureResult e;
  e.value = kTwoPi * base.value;
  e += los_integral(los_part);
  out.exponent = pref * e.value;
  out.exponent_err = pref * e.error_estimate;
  out.converged = e.converged;

  if (with_slope) {
    QuadratureResult d;
    d.value = kTwoPi * base.log_slope;
    d += los_integral(los_slope);
    out.log_slope = pref * d.value;
    out.log_slope_err = pref * d.error_estimate;
    out.converged = out.converged && d.converged;
  }
  return out;
}

void check_laplace_args(double s, double r_k) {
  if (!(std::isfinite(s) && s >= 0.0)) throw ParameterError("Laplace argument s must be >= 0");
  if (!(std::isfinite(r_k) && r_k > 0.0)) throw ParameterError("r_k must be > 0");
}

// Gamma(k, 1) density: law of pi lambda_b r_k^2.
inline double gamma_density(double rho, int k) {
  if (rho <= 0.0) return k == 1 ? 1.0 : 0.0;
  return std::exp((k - 1) * std::log(rho) - rho - std::lgamma(static_cast<double>(k)));
}

// Integral over rho in [0, inf) of an integrand whose features near the origin
// sit at rho ~ t^(-2/alpha_los): decades from a negligible-mass floor up to 1,
// then an exponential tail.
template <class F>
QuadratureResult integrate_rho(F& f, int k, double t, const Model& m, const QuadratureSpec& spec) {
  const double feature = std::min(1.0, std::pow(std::max(t, 1e-300), -2.0 / m.p.alpha_los));
  // The Gamma(k) mass below rho is at most rho^k / k!.
  const double floor_mass =
      std::pow(0.1 * spec.abs_tol * std::tgamma(k + 1.0), 1.0 / k);
  const double rho_lo = std::min(0.1, std::max(0.01 * feature, floor_mass));
  std::vector<double> pts{0.0};
  for (double x = rho_lo; x < 1.0; x *= 10.0) pts.push_back(x);
  pts.push_back(1.0);
  // Integrands are bounded by the Gamma(k) density; cut where its tail, at
  // most 2 g(rho) for rho >= 2k, is negligible.
  double rho_hi = std::max(10.0, 2.0 * k);
  while (2.0 * gamma_density(rho_hi, k) > 0.01 * spec.abs_tol) rho_hi += 2.0;
  pts.push_back(rho_hi);
  QuadratureResult out = integrate_points(f, pts, spec);
  out.error_estimate += 2.0 * gamma_density(rho_hi, k);
  return out;
}

// Integrand pieces shared by coverage and density: serving link at
// r = sqrt(rho / (pi lambda_b)), LoS with probability Q(r) / 2 pi.
struct ServingTerms {
  double los_weight;
  double r;
};

inline ServingTerms serving_terms(double rho, const Model& m) {
  const double r = std::sqrt(rho / (kPi * m.p.lambda_b));
  return {m.q_exact(r) / kTwoPi, r};
}

}  // namespace

LaplaceResult laplace_interference(double s, double r_k, const NetworkParams& params,
                                   LaplaceMode mode, const QuadratureSpec& spec) {
  check_laplace_args(s, r_k);
  const Model m(params, mode);
  const ExponentEval e = interference_exponent(s, r_k, m, false, spec);
  LaplaceResult out;
  out.exponent = e.exponent;
  out.value = e.diverged ? 0.0 : std::exp(-e.exponent);
  out.error_estimate = e.exponent_err;
  out.converged = e.converged && !e.diverged;
  out.diverged = e.diverged;
  return out;
}

LaplaceDerivative laplace_interference_derivative(double s, double r_k,
                                                  const NetworkParams& params, LaplaceMode mode,
                                                  const QuadratureSpec& spec) {
  check_laplace_args(s, r_k);
  if (s == 0.0) throw ParameterError("derivative is evaluated for s > 0");
  const Model m(params, mode);
  const ExponentEval e = interference_exponent(s, r_k, m, true, spec);
  LaplaceDerivative out;
  out.diverged = e.diverged;
  if (e.diverged) {
    out.laplace = 0.0;
    out.value = 0.0;
    out.converged = false;
    return out;
  }
  out.laplace = std::exp(-e.exponent);
  out.value = -out.laplace * e.log_slope / s;
  out.error_estimate =
      out.laplace * (e.log_slope_err + e.log_slope * e.exponent_err) / s;
  out.converged = e.converged;
  return out;
}

LaplaceResult laplace_interference_direct_2d(double s, double r_k, const NetworkParams& params,
                                             const QuadratureSpec& spec) {
  check_laplace_args(s, r_k);
  params.validate();
  LaplaceResult out;
  if (s == 0.0 || params.lambda_b == 0.0) return out;
  const NetworkParams p = params;
  if (p.lambda_c == 0.0 && p.alpha_los <= 2.0)
    throw DomainError("all-LoS interference with alpha_los <= 2 diverges");

  // 1 - E_{state,h}[exp(-s r^-alpha h)] integrated over the annulus.
  auto integrand = [&](double theta, double r) {
    const double p_los = los_probability(r, theta, p);
    const double x_l = s * std::pow(r, -p.alpha_los);
    const double x_n = s * std::pow(r, -p.alpha_nlos);
    return (1.0 - p_los / (1.0 + x_l) - (1.0 - p_los) / (1.0 + x_n)) * r;
  };
  auto radial = [&](double) { return Range{r_k, kInf, DecayHint::power, r_k}; };
  // |sin| and |cos| have kinks at multiples of pi/2 shifted by the orientation,
  // so integrate quadrant by quadrant.
  QuadratureResult total;
  for (int qd = 0; qd < 4; ++qd) {
    const double lo = p.orientation + 0.5 * kPi * qd;
    const Range outer{lo, lo + 0.5 * kPi};
    total += integrate_2d(integrand, outer, radial, spec);
  }
  out.exponent = p.lambda_b * total.value;
  out.error_estimate = p.lambda_b * total.error_estimate;
  out.value = std::exp(-out.exponent);
  out.converged = total.converged;
  return out;
}

QuadratureResult laplace_exponent_truncated(double s, double r_k, double r_max,
                                            const NetworkParams& params, LaplaceMode mode,
                                            const QuadratureSpec& spec) {
  check_laplace_args(s, r_k);
  if (!(r_max > r_k)) throw ParameterError("r_max must exceed r_k");
  const Model m(params, mode);
  auto integrand = [&](double r) {
    const double q = m.q_interference(r);
    const double x_n = s * std::pow(r, -m.p.alpha_nlos);
    const double x_l = s * std::pow(r, -m.p.alpha_los);
    return (kTwoPi * saturate(x_n) + q * (saturate(x_l) - saturate(x_n))) * r;
  };
  QuadratureResult res = integrate_finite(integrand, r_k, r_max, spec);
  res.value *= m.p.lambda_b;
  res.error_estimate *= m.p.lambda_b;
  return res;
}

CoverageResult coverage_probability(int k, double threshold, const NetworkParams& params,
                                    LaplaceMode mode, const QuadratureSpec& spec) {
  if (k < 1) throw ParameterError("coverage_probability needs k >= 1");
  if (!(std::isfinite(threshold) && threshold >= 0.0))
    throw ParameterError("coverage threshold must be >= 0");
  const Model m(params, mode);
  CoverageResult out;
  out.k = k;
  out.threshold = threshold;
  if (threshold == 0.0 || m.p.lambda_b == 0.0) {
    out.probability = out.raw_probability = 1.0;
    return out;
  }
  m.check_all_los_convergence();

  const QuadratureSpec inner = spec.inner();
  bool diverged = false;
  auto integrand = [&](double rho) -> IntegrandValue {
    const double g = gamma_density(rho, k);
    if (g == 0.0) return {0.0, 0.0, true};
    const ServingTerms st = serving_terms(rho, m);
    if (st.r == 0.0) return {g, 0.0, true};
    double value = 0.0;
    double noise = 0.0;
    bool ok = true;
    if (st.los_weight < 1.0) {
      const ExponentEval e =
          interference_exponent(threshold * std::pow(st.r, m.p.alpha_nlos), st.r, m, false, inner);
      diverged = diverged || e.diverged;
      const double lap = e.diverged ? 0.0 : std::exp(-e.exponent);
      value += (1.0 - st.los_weight) * lap;
      noise += (1.0 - st.los_weight) * lap * e.exponent_err;
      ok = ok && e.converged;
    }
    if (st.los_weight > 0.0) {
      const ExponentEval e =
          interference_exponent(threshold * std::pow(st.r, m.p.alpha_los), st.r, m, false, inner);
      diverged = diverged || e.diverged;
      const double lap = e.diverged ? 0.0 : std::exp(-e.exponent);
      value += st.los_weight * lap;
      noise += st.los_weight * lap * e.exponent_err;
      ok = ok && e.converged;
    }
    return {value * g, noise * g, ok || diverged};
  };
  out.quadrature = integrate_rho(integrand, k, threshold, m, spec);
  out.raw_probability = out.quadrature.value;
  out.probability = std::clamp(out.raw_probability, 0.0, 1.0);
  out.diverged = diverged;
  return out;
}

CoverageResult sir_ccdf(int k, double t, const NetworkParams& params, LaplaceMode mode,
                        const QuadratureSpec& spec) {
  return coverage_probability(k, t, params, mode, spec);
}

DensityResult sir_pdf(int k, double t, const NetworkParams& params, LaplaceMode mode,
                      const QuadratureSpec& spec) {
  if (k < 1) throw ParameterError("sir_pdf needs k >= 1");
  if (!(std::isfinite(t) && t > 0.0)) throw ParameterError("sir_pdf needs t > 0");
  const Model m(params, mode);
  DensityResult out;
  if (m.p.lambda_b == 0.0) return out;
  m.check_all_los_convergence();

  const QuadratureSpec inner = spec.inner();
  // -d/dt L(t r^alpha) = L * (s dE/ds) / t with s = t r^alpha.
  auto integrand = [&](double rho) -> IntegrandValue {
    const double g = gamma_density(rho, k);
    if (g == 0.0) return {0.0, 0.0, true};
    const ServingTerms st = serving_terms(rho, m);
    if (st.r == 0.0) return {0.0, 0.0, true};
    double value = 0.0;
    double noise = 0.0;
    bool ok = true;
    auto add = [&](double weight, double alpha) {
      const ExponentEval e = interference_exponent(t * std::pow(st.r, alpha), st.r, m, true, inner);
      if (e.diverged) return;
      const double lap = std::exp(-e.exponent);
      value += weight * lap * e.log_slope / t;
      noise += weight * lap * (e.log_slope_err + e.log_slope * e.exponent_err) / t;
      ok = ok && e.converged;
    };
    if (st.los_weight < 1.0) add(1.0 - st.los_weight, m.p.alpha_nlos);
    if (st.los_weight > 0.0) add(st.los_weight, m.p.alpha_los);
    return {value * g, noise * g, ok};
  };
  out.quadrature = integrate_rho(integrand, k, t, m, spec);
  out.value = out.quadrature.value;
  return out;
}

double sir_pdf_finite_difference(int k, double t, const NetworkParams& params, LaplaceMode mode,
                                 double rel_step) {
  if (!(t > 0.0) || !(rel_step > 0.0 && rel_step < 1.0))
    throw ParameterError("finite difference needs t > 0 and 0 < rel_step < 1");
  const QuadratureSpec tight{1e-13, 1e-12, 4'000'000};
  const double h = rel_step * t;
  const double lo = coverage_probability(k, t - h, params, mode, tight).raw_probability;
  const double hi = coverage_probability(k, t + h, params, mode, tight).raw_probability;
  return (lo - hi) / (2.0 * h);
}

namespace {

void check_rate_args(int k, const NetworkParams& params) {
  if (k < 1) throw ParameterError("rate needs k >= 1");
  params.validate();
  if (params.lambda_b == 0.0)
    throw DomainError("lambda_b = 0: no interferers, SIR and rate are unbounded");
}

// Decay length in u = log(1 + t). The CCDF tail falls no faster than
// t^(-2 / alpha_nlos) and in practice markedly slower at moderate t.
double rate_scale(const NetworkParams& p) { return 2.0 * p.alpha_nlos; }

// Thresholds beyond this are out of reach of any finite SIR sample.
constexpr double kMaxLogThreshold = 700.0;

// Integral over u in [0, inf) of a CCDF-type integrand in u = log(1 + t).
// Near u = 0 the CCDF behaves like 1 - c t^(2/alpha), so decades resolve the
// fractional power; a doubling grid follows the slowly decaying middle.
template <class F>
QuadratureResult integrate_log_threshold(F& f, const NetworkParams& p, const QuadratureSpec& spec) {
  std::vector<double> pts{0.0};
  for (double x = 1e-6; x < 1.0; x *= 10.0) pts.push_back(x);
  for (double x = 1.0; x <= 64.0; x *= 2.0) pts.push_back(x);
  const QuadratureSpec half{0.5 * spec.abs_tol, spec.rel_tol, spec.max_evals};
  QuadratureResult out = integrate_points(f, pts, half);
  out += integrate_semi_infinite(f, pts.back(), DecayHint::exp_linear, half, rate_scale(p));
  return out;
}

}  // namespace

RateResult conditional_rate(int k, const NetworkParams& params, LaplaceMode mode,
                            const QuadratureSpec& spec) {
  check_rate_args(k, params);
  const QuadratureSpec inner = spec.inner();
  auto integrand = [&](double u) -> IntegrandValue {
    if (u > kMaxLogThreshold) return {0.0, 0.0, true};
    const CoverageResult c = coverage_probability(k, std::expm1(u), params, mode, inner);
    return {c.raw_probability, c.quadrature.error_estimate, c.quadrature.converged};
  };
  RateResult out;
  out.quadrature = integrate_log_threshold(integrand, params, spec);
  out.value = out.quadrature.value / std::numbers::ln2;
  out.quadrature.value = out.value;
  out.quadrature.error_estimate /= std::numbers::ln2;
  return out;
}

RateResult conditional_rate_pdf_path(int k, const NetworkParams& params, LaplaceMode mode,
                                     const QuadratureSpec& spec) {
  check_rate_args(k, params);
  const QuadratureSpec inner = spec.inner();
  // t = e^u - 1: log2(1 + t) f(t) dt = (u / ln 2) f(e^u - 1) e^u du
  auto integrand = [&](double u) -> IntegrandValue {
    if (u <= 0.0 || u > kMaxLogThreshold) return {0.0, 0.0, true};
    const DensityResult d = sir_pdf(k, std::expm1(u), params, mode, inner);
    const double w = u * std::exp(u);
    return {d.value * w, d.quadrature.error_estimate * w, d.quadrature.converged};
  };
  RateResult out;
  out.quadrature = integrate_log_threshold(integrand, params, spec);
  out.value = out.quadrature.value / std::numbers::ln2;
  out.quadrature.value = out.value;
  out.quadrature.error_estimate /= std::numbers::ln2;
  return out;
}

RateResult sir_pdf_total_mass(int k, const NetworkParams& params, LaplaceMode mode,
                              const QuadratureSpec& spec) {
  check_rate_args(k, params);
  const QuadratureSpec inner = spec.inner();
  auto integrand = [&](double u) -> IntegrandValue {
    if (u <= 0.0 || u > kMaxLogThreshold) return {0.0, 0.0, true};
    const DensityResult d = sir_pdf(k, std::expm1(u), params, mode, inner);
    const double w = std::exp(u);
    return {d.value * w, d.quadrature.error_estimate * w, d.quadrature.converged};
  };
  RateResult out;
  out.quadrature = integrate_log_threshold(integrand, params, spec);
  out.value = out.quadrature.value;
  return out;
}

}  // namespace dualpath
