#include "dualpath/pathloss.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "dualpath/error.hpp"

namespace dualpath {

const char* to_string(LinkKind kind) { return kind == LinkKind::los ? "LoS" : "NLoS"; }

double expected_blockage_count(double r, double theta, const NetworkParams& p) {
  const double d = p.orientation - theta;
  return p.lambda_c *
         (r * p.length * std::abs(std::sin(d)) + r * p.width * std::abs(std::cos(d)) +
          p.width * p.length);
}

double los_probability(double r, double theta, const NetworkParams& p) {
  return std::exp(-expected_blockage_count(r, theta, p));
}

double nlos_probability(double r, double theta, const NetworkParams& p) {
  return -std::expm1(-expected_blockage_count(r, theta, p));
}

LinkState realized_path_loss(double r, LinkKind kind, const NetworkParams& p) {
  if (!std::isfinite(r) || r <= 0.0)
    throw DomainError("path loss r^-alpha is singular at r = 0");
  const double a = kind == LinkKind::los ? p.alpha_los : p.alpha_nlos;
  return {kind, a, std::pow(r, -a)};
}

namespace {

constexpr double kSeriesLimit = 15.0;

// exp(-x) * I0(x) for x >= 0 via the power series.
double i0_series_scaled(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum * std::exp(-x);
}

// exp(-x) * I0(x) for large x via the asymptotic expansion.
double i0_asymptotic_scaled(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
    if (next >= term) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(kTwoPi * x);
}

}  // namespace

double bessel_i0_scaled(double x) {
  const double ax = std::abs(x);
  return ax <= kSeriesLimit ? i0_series_scaled(ax) : i0_asymptotic_scaled(ax);
}

double bessel_i0(double x) {
  const double ax = std::abs(x);
  if (ax <= kSeriesLimit) {
    const double q = 0.25 * ax * ax;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum;
  }
  if (ax > 700.0) {
    // exp(ax) alone would overflow before the 1/sqrt factor is applied
    const double log_val = ax + std::log(i0_asymptotic_scaled(ax));
    return std::exp(log_val);
  }
  return std::exp(ax) * i0_asymptotic_scaled(ax);
}

QuadratureResult q_integral(double r, const NetworkParams& p) {
  if (!(std::isfinite(r) && r >= 0.0)) throw ParameterError("q_integral needs r >= 0");
  const double prefactor = std::exp(-p.lambda_c * p.width * p.length);
  if (prefactor == 0.0) return {0.0, 0.0, 0, true};
  const double a = p.lambda_c * r * p.length;
  const double b = p.lambda_c * r * p.width;
  auto f = [a, b](double t) { return std::exp(-(a * std::sin(t) + b * std::cos(t))); };
  // |sin| and |cos| repeat with period pi/2; integrate one quadrant.
  const QuadratureSpec spec{1e-12, 1e-14, 200'000};
  QuadratureResult res = integrate_finite(f, 0.0, 0.5 * kPi, spec);
  const double scale = 4.0 * prefactor;
  res.value *= scale;
  res.error_estimate *= scale;
  return res;
}

double q_bessel_bound(double r, const NetworkParams& p) {
  const double x = p.lambda_c * r * p.diagonal_length();
  const double log_val = -p.lambda_c * p.width * p.length + x + std::log(bessel_i0_scaled(x));
  return kTwoPi * std::exp(log_val);
}

AngularProfile::AngularProfile(double length, double width)
    : length_(length), width_(width), diag_(std::hypot(length, width)), step_(0.02) {
  if (!(length > 0.0 && width > 0.0 && std::isfinite(length) && std::isfinite(width)))
    throw ParameterError("AngularProfile needs positive rectangle sides");
  // G(u) <= 2*pi*exp(-u*min(l,w)/D): beyond u_max it underflows.
  u_max_ = 750.0 * diag_ / std::min(length, width);
  const auto n = static_cast<std::size_t>(std::ceil(u_max_ / step_)) + 1;
  log_g_.resize(n);
  dlog_g_.resize(n);

  const double cl = length / diag_;
  const double cw = width / diag_;
  const QuadratureSpec spec{1e-300, 1e-13, 400'000};
  for (std::size_t j = 0; j < n; ++j) {
    const double u = static_cast<double>(j) * step_;
    // Weight factored as exp(-u * (x - x_min)) to keep values O(1).
    const double x_min = std::min(cl, cw);
    auto w0 = [&](double t) {
      return std::exp(-u * (cl * std::sin(t) + cw * std::cos(t) - x_min));
    };
    auto w1 = [&](double t) {
      const double x = cl * std::sin(t) + cw * std::cos(t);
      return x * std::exp(-u * (x - x_min));
    };
    const double g0 = integrate_finite(w0, 0.0, 0.5 * kPi, spec).value;
    const double g1 = integrate_finite(w1, 0.0, 0.5 * kPi, spec).value;
    log_g_[j] = std::log(4.0 * g0) - u * x_min;
    dlog_g_[j] = -g1 / g0;
  }
}

double AngularProfile::g(double u) const {
  if (u <= 0.0) return kTwoPi;
  if (u >= u_max_) return 0.0;
  const double pos = u / step_;
  auto j = static_cast<std::size_t>(pos);
  if (j + 1 >= log_g_.size()) j = log_g_.size() - 2;
  const double s = pos - static_cast<double>(j);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  const double lg = h00 * log_g_[j] + h10 * step_ * dlog_g_[j] + h01 * log_g_[j + 1] +
                    h11 * step_ * dlog_g_[j + 1];
  return std::exp(lg);
}

double AngularProfile::q(double lambda_c, double r) const {
  if (lambda_c == 0.0) return kTwoPi;
  const double prefactor = std::exp(-lambda_c * width_ * length_);
  if (prefactor == 0.0) return 0.0;
  return prefactor * g(lambda_c * r * diag_);
}

std::shared_ptr<const AngularProfile> AngularProfile::shared(double length, double width) {
  static std::mutex mutex;
  static std::map<std::pair<double, double>, std::shared_ptr<const AngularProfile>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{length, width}];
  if (!slot) slot = std::make_shared<const AngularProfile>(length, width);
  return slot;
}

double q_profile(double r, const NetworkParams& p) {
  if (p.lambda_c == 0.0) return kTwoPi;
  if (std::exp(-p.lambda_c * p.width * p.length) == 0.0) return 0.0;
  return AngularProfile::shared(p.length, p.width)->q(p.lambda_c, r);
}

double mean_los_probability(double r, const NetworkParams& p) {
  if (p.lambda_c == 0.0) return 1.0;
  return q_profile(r, p) / kTwoPi;
}

}  // namespace dualpath
