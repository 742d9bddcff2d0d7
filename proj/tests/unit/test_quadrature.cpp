#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dualpath/error.hpp"
#include "dualpath/params.hpp"
#include "dualpath/quadrature.hpp"

namespace dualpath {
namespace {

TEST(IntegrateFinite, ReferenceValues) {
  EXPECT_NEAR(integrate_finite([](double) { return 1.0; }, 0.0, kTwoPi).value, kTwoPi, 1e-12);
  EXPECT_NEAR(integrate_finite([](double x) { return std::sin(x); }, 0.0, kPi).value, 2.0, 1e-12);
  EXPECT_NEAR(integrate_finite([](double x) { return std::exp(-x * x); }, 0.0, 6.0).value,
              0.8862269255, 1e-10);
}

TEST(IntegrateFinite, RejectsBadInterval) {
  EXPECT_THROW(integrate_finite([](double) { return 1.0; }, 1.0, 0.0), ParameterError);
  EXPECT_THROW(integrate_finite([](double) { return 1.0; }, 0.0, INFINITY), ParameterError);
  EXPECT_EQ(integrate_finite([](double) { return 1.0; }, 2.0, 2.0).value, 0.0);
}

TEST(IntegrateFinite, BudgetExhaustionIsReportedNotThrown) {
  const QuadratureSpec tight{1e-15, 1e-15, 100};
  const QuadratureResult r = integrate_finite([](double x) { return std::sqrt(x); }, 0.0, 1.0, tight);
  EXPECT_FALSE(r.converged);
  EXPECT_NEAR(r.value, 2.0 / 3.0, 1e-3);
}

TEST(IntegrateSemiInfinite, ReferenceValues) {
  const double lambda = 1.0 / (800.0 * 800.0 * kPi);
  auto rayleigh = [&](double r) { return 2 * kPi * lambda * r * std::exp(-kPi * lambda * r * r); };
  const double scale = 1.0 / std::sqrt(kPi * lambda);
  EXPECT_NEAR(integrate_semi_infinite(rayleigh, 0.0, DecayHint::exp_quadratic, {}, scale).value,
              1.0, 1e-9);
  EXPECT_NEAR(integrate_semi_infinite([](double x) { return std::exp(-x); }, 0.0,
                                      DecayHint::exp_linear)
                  .value,
              1.0, 1e-10);
  EXPECT_NEAR(integrate_semi_infinite([](double x) { return std::pow(x, -3.0); }, 1.0,
                                      DecayHint::power)
                  .value,
              0.5, 1e-10);
}

TEST(Integrate2d, ReferenceValues) {
  const Range unit{0.0, 1.0};
  EXPECT_NEAR(integrate_2d([](double, double) { return 1.0; }, unit, [&](double) { return unit; })
                  .value,
              1.0, 1e-12);
  EXPECT_NEAR(integrate_2d([](double x, double y) { return x * y; }, unit,
                           [&](double) { return unit; })
                  .value,
              0.25, 1e-12);
  const Range theta{0.0, kTwoPi};
  const Range radial{0.0, INFINITY, DecayHint::exp_quadratic, 1.0};
  EXPECT_NEAR(integrate_2d([](double, double r) { return r * std::exp(-r * r); }, theta,
                           [&](double) { return radial; })
                  .value,
              kPi, 1e-8);
}

TEST(Integrate2d, VariableInnerBounds) {
  // Triangle 0 < y < x < 1: int x y = 1/8.
  const QuadratureResult r = integrate_2d([](double x, double y) { return x * y; }, Range{0.0, 1.0},
                                          [](double x) { return Range{0.0, x}; });
  EXPECT_NEAR(r.value, 0.125, 1e-12);
}

TEST(Quadrature, Linearity) {
  auto f = [](double x) { return std::exp(-x) * std::cos(3 * x); };
  auto g = [](double x) { return 1.0 / (1.0 + x * x); };
  const QuadratureSpec spec{1e-12, 1e-12, 1'000'000};
  const double a = 2.5;
  const double b = -1.25;
  const double lhs = integrate_finite([&](double x) { return a * f(x) + b * g(x); }, 0.0, 5.0, spec).value;
  const double rhs = a * integrate_finite(f, 0.0, 5.0, spec).value +
                     b * integrate_finite(g, 0.0, 5.0, spec).value;
  EXPECT_NEAR(lhs, rhs, 1e-11);
}

TEST(Quadrature, Deterministic) {
  auto f = [](double x) { return std::log1p(x) / (1 + x * x * x); };
  const QuadratureResult a = integrate_semi_infinite(f, 0.0, DecayHint::power);
  const QuadratureResult b = integrate_semi_infinite(f, 0.0, DecayHint::power);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.error_estimate, b.error_estimate);
  EXPECT_EQ(a.evals, b.evals);
}

struct Case {
  std::string name;
  std::function<QuadratureResult(const QuadratureSpec&)> run;
  double truth;
};

// |value - truth| <= 3 * error_estimate whenever converged, and converged
// implies the requested tolerance.
TEST(Quadrature, ErrorHonesty) {
  const std::vector<Case> cases{
      {"x^2", [](const QuadratureSpec& s) { return integrate_finite([](double x) { return x * x; }, 0, 1, s); }, 1.0 / 3},
      {"sqrt", [](const QuadratureSpec& s) { return integrate_finite([](double x) { return std::sqrt(x); }, 0, 1, s); }, 2.0 / 3},
      {"log", [](const QuadratureSpec& s) { return integrate_finite([](double x) { return x > 0 ? std::log(x) : 0.0; }, 0, 1, s); }, -1.0},
      {"1/(1+x^2)", [](const QuadratureSpec& s) { return integrate_finite([](double x) { return 1 / (1 + x * x); }, 0, 1, s); }, kPi / 4},
      {"cos 20x", [](const QuadratureSpec& s) { return integrate_finite([](double x) { return std::cos(20 * x); }, 0, 1, s); }, std::sin(20.0) / 20},
      {"|x-1/3|", [](const QuadratureSpec& s) { return integrate_finite([](double x) { return std::abs(x - 1.0 / 3); }, 0, 1, s); }, 5.0 / 18},
      {"exp(-x)", [](const QuadratureSpec& s) { return integrate_semi_infinite([](double x) { return std::exp(-x); }, 0, DecayHint::exp_linear, s); }, 1.0},
      {"1/(1+x)^2", [](const QuadratureSpec& s) { return integrate_semi_infinite([](double x) { return 1 / ((1 + x) * (1 + x)); }, 0, DecayHint::power, s); }, 1.0},
      {"x exp(-x^2)", [](const QuadratureSpec& s) { return integrate_semi_infinite([](double x) { return x * std::exp(-x * x); }, 0, DecayHint::exp_quadratic, s); }, 0.5},
      {"1/(1+x^2) inf", [](const QuadratureSpec& s) { return integrate_semi_infinite([](double x) { return 1 / (1 + x * x); }, 0, DecayHint::power, s); }, kPi / 2},
  };
  for (const QuadratureSpec& spec : {QuadratureSpec{1e-6, 1e-6, 1'000'000}, QuadratureSpec{}}) {
    for (const Case& c : cases) {
      const QuadratureResult r = c.run(spec);
      ASSERT_TRUE(r.converged) << c.name;
      EXPECT_LE(std::abs(r.value - c.truth), 3.0 * r.error_estimate + 1e-15) << c.name;
      EXPECT_LE(r.error_estimate, spec.target(r.value)) << c.name;
    }
  }
}

}  // namespace
}  // namespace dualpath
