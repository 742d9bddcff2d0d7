#pragma once

#include <numbers>

namespace dualpath {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

double db_to_linear(double db);
double linear_to_db(double linear);

/// Scalar parameters of the network model.
///
/// Defaults are the reference deployment: one BS per 800 m radius disc on
/// average, 0.002 blockages per m^2 of 15 m x 10 m, LoS/NLoS exponents 2 and 5
/// and a -5 dB SIR threshold. All quantities are linear and in meters.
struct NetworkParams {
  double lambda_b = 1.0 / (800.0 * 800.0 * kPi);  ///< BS intensity, per m^2
  double lambda_c = 0.002;                        ///< blockage intensity, per m^2
  double length = 15.0;                           ///< blockage length, m
  double width = 10.0;                            ///< blockage width, m
  double orientation = 0.0;                       ///< blockage orientation, rad
  double alpha_los = 2.0;
  double alpha_nlos = 5.0;
  double tx_power = 1.0;  ///< cancels in every SIR expression
  double sir_threshold = 0.31622776601683794;  ///< 10^(-0.5), i.e. -5 dB

  /// Throws ParameterError when any invariant is violated.
  void validate() const;

  double half_diagonal() const;
  double diagonal_length() const;  // sqrt(l^2 + w^2)
  double min_side() const;

  bool operator==(const NetworkParams&) const = default;
};

}  // namespace dualpath
