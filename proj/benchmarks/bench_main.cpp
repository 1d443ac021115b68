#include <benchmark/benchmark.h>

#include "shearmix/flow.hpp"
#include "shearmix/spectral.hpp"
#include "shearmix/stochastic.hpp"

namespace {

using namespace shearmix;

void BM_PeriodStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ScalarField f = gaussian_bump(n, {0.3, 0.6}, 0.05);
  RngStream shifts(1, 0);
  std::uint64_t p = 0;
  for (auto _ : state) {
    f = period_step(f, shifts.uniform_at(2 * p), shifts.uniform_at(2 * p + 1), 1e-4, 0.5,
                    Profile::sine, 1);
    ++p;
    benchmark::DoNotOptimize(f.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n);
}
BENCHMARK(BM_PeriodStep)->Arg(128)->Arg(256)->Arg(512);

void BM_Norms(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ScalarField f = gaussian_bump(n, {0.3, 0.6}, 0.05);
  const double orders[2] = {1.0, -1.0};
  for (auto _ : state) benchmark::DoNotOptimize(norms(f, orders));
}
BENCHMARK(BM_Norms)->Arg(256);

void BM_DoubleStep(benchmark::State& state) {
  RngStream rng(2, 0);
  TorusPoint x{0.1, 0.2};
  for (auto _ : state) {
    x = double_step(x, rng.uniform(), rng.uniform(), 10.0, Profile::sine);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_DoubleStep);

void BM_PairSdeDoubleStep(benchmark::State& state) {
  RngStream rng(3, 0);
  SeparatedPair p{{0.1, 0.2}, {1e-6, 0.0}};
  const SdeConfig cfg{1e-3, static_cast<int>(state.range(0)), DriftSign::plus};
  for (auto _ : state) {
    p = pair_sde_double_step(p, rng.uniform(), rng.uniform(), 10.0, Profile::sine, cfg, rng);
    if (norm_linf(p.sep) > 0.1) p.sep = {1e-6, 0.0};
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_PairSdeDoubleStep)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
