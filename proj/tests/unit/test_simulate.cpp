#include <cmath>
#include <cstdlib>
#include <vector>

#include <gtest/gtest.h>

#include "dualpath/analysis.hpp"
#include "dualpath/parallel.hpp"
#include "dualpath/rng.hpp"
#include "dualpath/simulate.hpp"

namespace dualpath {
namespace {

class ScopedWorkers {
 public:
  explicit ScopedWorkers(const char* n) { setenv(kWorkersEnvVar, n, 1); }
  ~ScopedWorkers() { unsetenv(kWorkersEnvVar); }
};

TEST(AssociateTable1, ReferenceCases) {
  const std::vector<LinkPower> equal{{100, 4}, {120, 4}, {300, 4}};
  EXPECT_EQ(associate_table1(equal), 1);
  bool fallback = false;
  const std::vector<LinkPower> two{{100, 5}, {110, 2}};
  EXPECT_EQ(associate_table1(two, &fallback), 2);
  EXPECT_TRUE(fallback);
  const std::vector<LinkPower> three{{100, 2}, {110, 5}, {120, 5}};
  EXPECT_EQ(associate_table1(three, &fallback), 1);
  EXPECT_FALSE(fallback);
  // First local maximum, not the global one: 10^-5 > 20^-5 but 200^-2 beats both.
  const std::vector<LinkPower> local{{10, 5}, {20, 5}, {200, 2}};
  EXPECT_EQ(associate_table1(local), 1);
  EXPECT_EQ(associate_argmax(local), 3);
}

TEST(AssociateArgmax, ReferenceCases) {
  const std::vector<LinkPower> equal{{100, 4}, {120, 4}, {300, 4}};
  EXPECT_EQ(associate_argmax(equal), 1);
  const std::vector<LinkPower> two{{100, 5}, {110, 2}};
  EXPECT_EQ(associate_argmax(two), 2);
  const std::vector<LinkPower> three{{100, 2}, {110, 5}, {120, 5}};
  EXPECT_EQ(associate_argmax(three), 1);
  const std::vector<double> fading{0.1, 50.0, 1.0};
  EXPECT_EQ(associate_argmax(equal, fading), 2);
}

TEST(Parsing, RulesAndModes) {
  EXPECT_EQ(parse_association_rule("table1"), AssociationRule::table1);
  EXPECT_EQ(parse_association_rule("argmax"), AssociationRule::argmax_no_fading);
  EXPECT_EQ(parse_association_rule("argmax_fading"), AssociationRule::argmax_with_fading);
  EXPECT_FALSE(parse_association_rule("nearest-ish").has_value());
  EXPECT_EQ(parse_blockage_mode("geometric"), BlockageMode::geometric);
  EXPECT_FALSE(parse_blockage_mode("none").has_value());
}

TEST(RunTrial, NoBlockagesMeansAllLos) {
  TrialConfig cfg;
  cfg.params.lambda_c = 0.0;
  cfg.params.alpha_los = 3.0;
  cfg.trials = 2000;
  for (std::size_t i = 0; i < 200; ++i) {
    const SirSample s = run_trial(cfg, i);
    EXPECT_EQ(s.serving_state.kind, LinkKind::los);
    EXPECT_EQ(s.serving_k, 1);
    EXPECT_GT(s.sir_linear, 0.0);
  }
  EXPECT_EQ(simulate(cfg, {}).serving_los_fraction, 1.0);
  EXPECT_EQ(estimate_association(cfg)[0], 1.0);
}

TEST(RunTrial, DeterministicPerIndex) {
  TrialConfig cfg;
  cfg.blockage_mode = BlockageMode::geometric;
  for (std::size_t i : {0u, 5u, 999u}) {
    const SirSample a = run_trial(cfg, i);
    const SirSample b = run_trial(cfg, i);
    EXPECT_EQ(a.sir_linear, b.sir_linear);
    EXPECT_EQ(a.serving_k, b.serving_k);
  }
  EXPECT_NE(run_trial(cfg, 1).sir_linear, run_trial(cfg, 2).sir_linear);
}

TEST(RunTrial, ServingRuleInvariants) {
  TrialConfig cfg;
  cfg.params.lambda_b = 0.0008;
  cfg.params.lambda_c = 0.0005;
  cfg.trials = 3000;
  cfg.association = AssociationRule::argmax_no_fading;
  int disagreements = 0;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const SirSample s = run_trial(cfg, i);
    ASSERT_EQ(s.serving_k, s.argmax_k);
    disagreements += s.table1_k != s.argmax_k;
  }
  cfg.association = AssociationRule::table1;
  for (std::size_t i = 0; i < 500; ++i) {
    const SirSample s = run_trial(cfg, i);
    ASSERT_EQ(s.serving_k, s.table1_k);
  }
  cfg.association = AssociationRule::nearest_k;
  cfg.forced_k = 3;
  for (std::size_t i = 0; i < 200; ++i) ASSERT_EQ(run_trial(cfg, i).serving_k, 3);
  EXPECT_GT(disagreements, 0);
}

TEST(RunTrial, SparseRegionResamples) {
  TrialConfig cfg;
  cfg.region_radius = 600.0;  // about 0.56 BSs on average
  cfg.trials = 200;
  const SimulationSummary s = simulate(cfg, {});
  EXPECT_GT(s.resamples, 0u);
}

TEST(Fading, UnitMean) {
  RngStream rng = make_stream(99, 0);
  double sum = 0.0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) sum += unit_exponential(rng);
  EXPECT_NEAR(sum / n, 1.0, 0.01);
}

TEST(Simulate, BitIdenticalAcrossWorkerCounts) {
  TrialConfig cfg;
  cfg.trials = 5000;
  cfg.master_seed = 12345;
  const std::vector<double> thr{0.1, 0.316, 1.0};
  SimulationSummary a;
  SimulationSummary b;
  {
    ScopedWorkers w("1");
    a = simulate(cfg, thr);
  }
  {
    ScopedWorkers w("4");
    b = simulate(cfg, thr);
  }
  for (std::size_t t = 0; t < thr.size(); ++t) EXPECT_EQ(a.coverage[t].value, b.coverage[t].value);
  EXPECT_EQ(a.mean_rate.value, b.mean_rate.value);
  EXPECT_EQ(a.mean_rate.half_width, b.mean_rate.half_width);
  EXPECT_EQ(a.association_hist, b.association_hist);
  EXPECT_EQ(a.disagreement_rate, b.disagreement_rate);
  for (int k = 0; k < kRadialBins; ++k) EXPECT_EQ(a.los_by_bin[k].links, b.los_by_bin[k].links);
}

TEST(Simulate, SummaryInvariants) {
  TrialConfig cfg;
  cfg.trials = 4000;
  const std::vector<double> thr{1e-9, 0.1, 1.0};
  const SimulationSummary s = simulate(cfg, thr);
  EXPECT_EQ(s.coverage[0].value, 1.0);
  EXPECT_GT(s.coverage[1].value, s.coverage[2].value);
  double sum = 0.0;
  for (double f : s.association_hist) sum += f;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(s.association_hist.size(), static_cast<std::size_t>(cfg.k_track) + 1);
  EXPECT_GT(estimate_coverage(cfg, 0.1).value, estimate_coverage(cfg, 1.0).value);
  EXPECT_GT(estimate_rate(cfg).value, 0.0);
}

// Both blockage modes reproduce the single-link LoS law in every radial bin.
TEST(Simulate, RadialLosMarginalsBothModes) {
  for (BlockageMode mode : {BlockageMode::probabilistic, BlockageMode::geometric}) {
    TrialConfig cfg;
    cfg.blockage_mode = mode;
    cfg.trials = mode == BlockageMode::geometric ? 2000 : 20000;
    cfg.region_radius = 3000.0;
    const SimulationSummary s = simulate(cfg, {});
    for (const RadialLosBin& bin : s.los_by_bin) {
      ASSERT_GT(bin.links, 0u);
      const double se = std::sqrt(bin.predicted * (1.0 - bin.predicted) / bin.links);
      EXPECT_NEAR(bin.los_frequency, bin.predicted, 3.0 * se + 1e-12)
          << to_string(mode) << " bin [" << bin.r_lo << ", " << bin.r_hi << ")";
    }
  }
}

TEST(Simulate, TruncationInsensitive) {
  TrialConfig cfg;
  cfg.trials = 50'000;
  const double thr[] = {cfg.params.sir_threshold};
  const Estimate base = simulate(cfg, thr).coverage[0];
  cfg.region_radius = 2.0 * default_region_radius(cfg.params);
  const Estimate wide = simulate(cfg, thr).coverage[0];
  EXPECT_LT(std::abs(base.value - wide.value), base.half_width);
}

TEST(EstimateLinkLos, MatchesLosLaw) {
  const NetworkParams p;
  const LinkLosEstimate e = estimate_link_los(p, 100.0, 0.0, 50'000, 3);
  EXPECT_NEAR(e.expected_count, 2.3, 1e-12);
  EXPECT_NEAR(e.mean_count, 2.3, 3.0 * e.count_std_error);
  EXPECT_NEAR(e.los_frequency, e.expected_los, 3.0 * std::sqrt(e.expected_los * (1 - e.expected_los) / 50'000));
}

TEST(EstimateLaplaceMc, BothEstimatorsAgreeWithAnalysis) {
  const NetworkParams p;
  const double r_k = 200.0;
  const double s = p.sir_threshold * std::pow(r_k, p.alpha_nlos);
  const double exact = laplace_interference(s, r_k, p).value;
  const LaplaceMcEstimate full = estimate_laplace_mc(p, s, r_k, 40'000, 8);
  const LaplaceMcEstimate cond =
      estimate_laplace_mc(p, s, r_k, 40'000, 8, LaplaceMcMethod::conditional);
  EXPECT_NEAR(full.value, exact, 3.0 * full.std_error);
  EXPECT_NEAR(cond.value, exact, 3.0 * cond.std_error);
  EXPECT_LT(cond.std_error, full.std_error);
}

}  // namespace
}  // namespace dualpath
