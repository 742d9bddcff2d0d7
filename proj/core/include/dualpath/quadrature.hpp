#pragma once

// Adaptive Gauss-Kronrod (10/21) integration with explicit error control.
//
// Integrands may return either a plain double or an IntegrandValue carrying
// the numerical error already present in that sample (for iterated integrals).
// That error is integrated alongside the value and reported in
// QuadratureResult::error_estimate; it does not drive subdivision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <type_traits>
#include <vector>

#include "dualpath/error.hpp"

namespace dualpath {

struct QuadratureSpec {
  double abs_tol = 1e-9;
  double rel_tol = 1e-8;
  std::size_t max_evals = 1'000'000;

  void validate() const {
    if (!(abs_tol > 0.0 || rel_tol > 0.0) || abs_tol < 0.0 || rel_tol < 0.0)
      throw ParameterError("quadrature needs abs_tol > 0 or rel_tol > 0");
    if (max_evals < 100) throw ParameterError("quadrature max_evals must be >= 100");
  }
  double target(double value) const { return std::max(abs_tol, rel_tol * std::abs(value)); }
  /// Tolerances handed to an inner integral of an iterated rule.
  QuadratureSpec inner() const { return {abs_tol / 10.0, rel_tol / 10.0, max_evals}; }
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evals = 0;
  bool converged = true;

  QuadratureResult& operator+=(const QuadratureResult& o) {
    value += o.value;
    error_estimate += o.error_estimate;
    evals += o.evals;
    converged = converged && o.converged;
    return *this;
  }
};

/// Sample of an integrand that is itself the result of a numerical procedure.
struct IntegrandValue {
  double value = 0.0;
  double noise = 0.0;  ///< absolute error bound of `value`
  bool ok = true;      ///< false if the producing procedure did not converge
};

enum class DecayHint { exp_quadratic, exp_linear, power };

/// One-dimensional integration range; `upper` may be +infinity, in which case
/// `hint` and `scale` (the characteristic decay length) select the transform.
struct Range {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  DecayHint hint = DecayHint::power;
  double scale = 1.0;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980029534, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd Kronrod nodes kXgk[1], kXgk[3], ..., kXgk[9].
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  double noise = 0.0;
  bool ok = true;
};

template <class F>
IntegrandValue sample(F& f, double x) {
  using R = std::invoke_result_t<F&, double>;
  if constexpr (std::is_same_v<std::decay_t<R>, IntegrandValue>) {
    return f(x);
  } else {
    return {static_cast<double>(f(x)), 0.0, true};
  }
}

template <class F>
Segment gk21(F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<double, 10> f1{};
  std::array<double, 10> f2{};
  Segment seg{a, b};

  const IntegrandValue fc = sample(f, center);
  double resk = fc.value * kWgk[10];
  double resg = 0.0;
  double noise = fc.noise * kWgk[10];
  bool ok = fc.ok;
  double resabs = std::abs(resk);

  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const IntegrandValue lo = sample(f, center - dx);
    const IntegrandValue hi = sample(f, center + dx);
    f1[j] = lo.value;
    f2[j] = hi.value;
    const double sum = lo.value + hi.value;
    resk += kWgk[j] * sum;
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
    resabs += kWgk[j] * (std::abs(lo.value) + std::abs(hi.value));
    noise += kWgk[j] * (lo.noise + hi.noise);
    ok = ok && lo.ok && hi.ok;
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc.value - reskh);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));

  const double scale = std::abs(half);
  resk *= half;
  resabs *= scale;
  resasc *= scale;
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);

  seg.value = resk;
  seg.error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
  seg.noise = noise * scale;
  seg.ok = ok;
  return seg;
}

template <class F>
QuadratureResult adaptive(F& f, std::span<const double> breakpoints, const QuadratureSpec& spec) {
  spec.validate();
  auto worse = [](const Segment& x, const Segment& y) { return x.error < y.error; };
  std::priority_queue<Segment, std::vector<Segment>, decltype(worse)> heap(worse);

  QuadratureResult out;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) continue;
    Segment s = gk21(f, breakpoints[i], breakpoints[i + 1]);
    out.evals += 21;
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }

  bool stuck = false;
  while (!heap.empty() && total_err > spec.target(total) && out.evals + 42 <= spec.max_evals) {
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) || !std::isfinite(worst.error)) {
      stuck = true;
      break;
    }
    heap.pop();
    const Segment left = gk21(f, worst.a, mid);
    const Segment right = gk21(f, mid, worst.b);
    out.evals += 42;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum in a fixed order so the reported value does not carry the drift of
  // the running updates above.
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  double value = 0.0;
  double err = 0.0;
  double noise = 0.0;
  bool ok = true;
  for (const Segment& s : segs) {
    value += s.value;
    err += s.error;
    noise += s.noise;
    ok = ok && s.ok;
  }
  out.value = value;
  out.converged = !stuck && ok && std::isfinite(value) && err <= spec.target(value);
  out.error_estimate = err + noise;
  return out;
}

}  // namespace detail

/// Adaptive subdivision on the finite interval [a, b].
template <class F>
QuadratureResult integrate_finite(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b)) {
    if (a == b) return {};
    throw ParameterError("integrate_finite needs finite a < b");
  }
  const std::array<double, 2> pts{a, b};
  return detail::adaptive(f, pts, spec);
}

/// Adaptive integration over consecutive sub-intervals given by sorted
/// `breakpoints` (discontinuities, kinks, peaks).
template <class F>
QuadratureResult integrate_points(F&& f, std::span<const double> breakpoints,
                                  const QuadratureSpec& spec = {}) {
  if (breakpoints.size() < 2) throw ParameterError("integrate_points needs >= 2 breakpoints");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
    throw ParameterError("integrate_points needs sorted breakpoints");
  return detail::adaptive(f, breakpoints, spec);
}

/// Integral over [a, +inf).
///
/// - power: x = a + scale * t / (1 - t) on t in [0, 1).
/// - exp_linear: x = a - scale * log(1 - t) on t in [0, 1).
/// - exp_quadratic: truncated at a + 9 * scale (Gaussian tail below e^-81);
///   the neglected tail, bounded by |f(b)| * scale, is added to the error.
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, double a, DecayHint hint,
                                         const QuadratureSpec& spec = {}, double scale = 1.0) {
  if (!std::isfinite(a) || a < 0.0) throw ParameterError("integrate_semi_infinite needs a >= 0");
  if (!(std::isfinite(scale) && scale > 0.0))
    throw ParameterError("integrate_semi_infinite needs a positive scale");

  switch (hint) {
    case DecayHint::power: {
      auto g = [&](double t) -> IntegrandValue {
        const double om = 1.0 - t;
        const double jac = scale / (om * om);
        IntegrandValue v = detail::sample(f, a + scale * t / om);
        return {v.value * jac, v.noise * jac, v.ok};
      };
      const std::array<double, 2> pts{0.0, 1.0};
      return detail::adaptive(g, pts, spec);
    }
    case DecayHint::exp_linear: {
      auto g = [&](double t) -> IntegrandValue {
        const double om = 1.0 - t;
        const double jac = scale / om;
        IntegrandValue v = detail::sample(f, a - scale * std::log1p(-t));
        return {v.value * jac, v.noise * jac, v.ok};
      };
      const std::array<double, 2> pts{0.0, 1.0};
      return detail::adaptive(g, pts, spec);
    }
    case DecayHint::exp_quadratic: {
      const double b = a + 9.0 * scale;
      QuadratureResult r = integrate_finite(f, a, b, spec);
      const double tail = std::abs(detail::sample(f, b).value) * scale;
      r.error_estimate += tail;
      r.evals += 1;
      return r;
    }
  }
  throw ParameterError("unknown decay hint");
}

template <class F>
QuadratureResult integrate_range(F&& f, const Range& range, const QuadratureSpec& spec = {}) {
  if (std::isinf(range.upper)) return integrate_semi_infinite(f, range.lower, range.hint, spec, range.scale);
  return integrate_finite(f, range.lower, range.upper, spec);
}

/// Iterated integral of f(x, y) over x in `outer`, y in inner(x). The inner
/// integrals run at a tenth of the outer tolerances; their error estimates are
/// integrated into the reported error.
template <class F, class InnerRange>
QuadratureResult integrate_2d(F&& f, const Range& outer, InnerRange&& inner,
                              const QuadratureSpec& spec = {}) {
  const QuadratureSpec inner_spec = spec.inner();
  std::size_t inner_evals = 0;
  auto outer_integrand = [&](double x) -> IntegrandValue {
    const Range r = inner(x);
    if (!(r.upper > r.lower)) return {0.0, 0.0, true};
    auto fy = [&](double y) { return f(x, y); };
    const QuadratureResult q = integrate_range(fy, r, inner_spec);
    inner_evals += q.evals;
    return {q.value, q.error_estimate, q.converged};
  };
  QuadratureResult res = integrate_range(outer_integrand, outer, spec);
  res.evals += inner_evals;
  return res;
}

}  // namespace dualpath
