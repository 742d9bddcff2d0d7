#pragma once

#include <memory>
#include <vector>

#include "dualpath/params.hpp"
#include "dualpath/quadrature.hpp"

namespace dualpath {

enum class LinkKind { los, nlos };

const char* to_string(LinkKind kind);

struct LinkState {
  LinkKind kind = LinkKind::nlos;
  double exponent = 0.0;
  double path_loss = 0.0;  ///< r^-exponent
};

/// Mean number of rectangles crossing the link to a BS at (r, theta).
double expected_blockage_count(double r, double theta, const NetworkParams& params);

double los_probability(double r, double theta, const NetworkParams& params);
double nlos_probability(double r, double theta, const NetworkParams& params);

/// Path loss of a link in the given state. r must be > 0 (DomainError).
LinkState realized_path_loss(double r, LinkKind kind, const NetworkParams& params);

/// Modified Bessel function of the first kind, order zero.
double bessel_i0(double x);
/// exp(-|x|) * I0(x); finite for all finite x.
double bessel_i0_scaled(double x);

/// Q(r): LoS probability integrated over the BS azimuth on [0, 2*pi), by
/// adaptive quadrature of one quadrant (absolute error <= 1e-10).
QuadratureResult q_integral(double r, const NetworkParams& params);

/// 2*pi*exp(-lambda_c*w*l)*I0(lambda_c*r*sqrt(l^2+w^2)), the azimuth integral
/// with the absolute values dropped. Upper bound of Q(r); may overflow to inf.
double q_bessel_bound(double r, const NetworkParams& params);

/// Tabulated G(u) = 4 * int_0^{pi/2} exp(-u (l sin t + w cos t) / D) dt with
/// D = sqrt(l^2 + w^2), so that Q(r) = exp(-lambda_c w l) G(lambda_c r D).
/// log G is interpolated by cubic Hermite splines on a uniform grid; the
/// relative interpolation error is below 1e-10.
class AngularProfile {
 public:
  AngularProfile(double length, double width);

  /// Q(r) for blockage intensity lambda_c.
  double q(double lambda_c, double r) const;
  /// G(u) interpolated.
  double g(double u) const;
  double u_max() const { return u_max_; }

  /// Process-wide cached profile for the rectangle size (thread safe).
  static std::shared_ptr<const AngularProfile> shared(double length, double width);

 private:
  double length_;
  double width_;
  double diag_;
  double step_;
  double u_max_;
  std::vector<double> log_g_;
  std::vector<double> dlog_g_;
};

/// Q(r) / (2*pi) from the shared profile: the LoS probability averaged over a
/// uniform azimuth.
double mean_los_probability(double r, const NetworkParams& params);
/// Q(r) from the shared profile.
double q_profile(double r, const NetworkParams& params);

}  // namespace dualpath
