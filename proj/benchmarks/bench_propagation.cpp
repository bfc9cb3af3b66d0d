#include <numbers>

#include <benchmark/benchmark.h>

#include "aiqm/protocol.hpp"

using namespace aiqm;

namespace {

DriveParams drive(int n, double factor) {
  DriveParams p;
  p.chi = 1.0;
  p.delta = 1.0;
  p.omega_m = 2 * std::numbers::pi * factor * n;
  p.omega = cancellation_ratio() * p.omega_m;
  return p;
}

void BM_PeriodPropagator(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpinSystem sys(n);
  const DriveParams p = drive(n, 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(period_propagator(p, sys, {}));
}
BENCHMARK(BM_PeriodPropagator)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_EvolveStatic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpinSystem sys(n);
  const SpinOperator h = SpinOperator::observable(sys.jy2() - sys.jx2());
  const StateVector psi = sys.dicke(0);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_static(h, 0.05, psi));
}
BENCHMARK(BM_EvolveStatic)->Arg(20)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_FullStageIdeal(benchmark::State& state) {
  FullStageConfig cfg;
  cfg.n_particles = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_full_stage_protocol(cfg));
}
BENCHMARK(BM_FullStageIdeal)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RamseyFullDrive(benchmark::State& state) {
  RamseyConfig cfg;
  cfg.n_particles = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_fig2_protocol(cfg));
}
BENCHMARK(BM_RamseyFullDrive)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
