#include "dualpath/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dualpath/error.hpp"

namespace dualpath {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError("invalid network parameter: " + what);
}

}  // namespace

void NetworkParams::validate() const {
  require(std::isfinite(lambda_b) && lambda_b >= 0.0, "lambda_b must be finite and >= 0");
  require(std::isfinite(lambda_c) && lambda_c >= 0.0, "lambda_c must be finite and >= 0");
  require(std::isfinite(length) && length > 0.0, "length must be > 0");
  require(std::isfinite(width) && width > 0.0, "width must be > 0");
  require(std::isfinite(orientation), "orientation must be finite");
  require(std::isfinite(alpha_los) && alpha_los >= 2.0, "alpha_los must be >= 2");
  require(std::isfinite(alpha_nlos) && alpha_nlos > alpha_los,
          "alpha_nlos must exceed alpha_los");
  require(std::isfinite(tx_power) && tx_power > 0.0, "tx_power must be > 0");
  require(std::isfinite(sir_threshold) && sir_threshold > 0.0, "sir_threshold must be > 0");
}

double NetworkParams::half_diagonal() const { return 0.5 * diagonal_length(); }

double NetworkParams::diagonal_length() const { return std::hypot(length, width); }

double NetworkParams::min_side() const { return std::min(length, width); }

}  // namespace dualpath
