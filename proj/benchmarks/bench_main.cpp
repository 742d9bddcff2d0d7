#include <benchmark/benchmark.h>

#include "dualpath/analysis.hpp"
#include "dualpath/pathloss.hpp"
#include "dualpath/simulate.hpp"

namespace {

using dualpath::NetworkParams;

void BM_QIntegral(benchmark::State& state) {
  const NetworkParams p;
  const double r = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dualpath::q_integral(r, p).value);
}
BENCHMARK(BM_QIntegral)->Arg(10)->Arg(100)->Arg(1000);

void BM_QProfile(benchmark::State& state) {
  const NetworkParams p;
  double r = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dualpath::q_profile(r, p));
    r = r < 2000.0 ? r * 1.01 : 1.0;
  }
}
BENCHMARK(BM_QProfile);

void BM_Laplace(benchmark::State& state) {
  const NetworkParams p;
  const double r_k = 400.0;
  const double s = p.sir_threshold * std::pow(r_k, p.alpha_nlos);
  for (auto _ : state) benchmark::DoNotOptimize(dualpath::laplace_interference(s, r_k, p).value);
}
BENCHMARK(BM_Laplace)->Unit(benchmark::kMicrosecond);

void BM_Coverage(benchmark::State& state) {
  const NetworkParams p;
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(dualpath::coverage_probability(k, p.sir_threshold, p).probability);
}
BENCHMARK(BM_Coverage)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_RunTrial(benchmark::State& state) {
  dualpath::TrialConfig cfg;
  cfg.blockage_mode = state.range(0) == 0 ? dualpath::BlockageMode::probabilistic
                                          : dualpath::BlockageMode::geometric;
  cfg.trials = 1u << 30;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dualpath::run_trial(cfg, i++).sir_linear);
}
BENCHMARK(BM_RunTrial)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
