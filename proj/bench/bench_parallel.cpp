// Serial reference path versus the OpenMP kernels: the trial loop of a
// study and the node loop inside one CoCoA round.

#include <benchmark/benchmark.h>

#include "fpcocoa/cocoa.hpp"
#include "fpcocoa/harness.hpp"

namespace {

using namespace fpcocoa;

harness::ExperimentPlan sweepPlan(int workers) {
  harness::ExperimentPlan plan;
  plan.n = 40;
  plan.p = 100;
  plan.K = 2;
  plan.p1Values = {20, 40, 60};
  plan.iterations = 100;
  plan.trials = 16;
  plan.testRows = 400;
  plan.masterSeed = 7;
  plan.workers = workers;
  return plan;
}

void BM_SweepTrials(benchmark::State& state) {
  const auto plan = sweepPlan(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(harness::partitionSweep(plan));
}
BENCHMARK(BM_SweepTrials)->Arg(1)->Arg(0)->ArgName("workers")->Unit(benchmark::kMillisecond);

void BM_CocoaNodes(benchmark::State& state) {
  SeedStream rng(3);
  const int n = 200;
  const int K = 8;
  const Matrix a = numkern::gaussianMatrix(n, 800, rng);
  const Vector y = a * Vector::Ones(800);
  const auto spec = PartitionSpec::even(800, K);
  cocoa::CocoaConfig cfg;
  cfg.iterations = 50;
  const cocoa::RunOptions opts{cocoa::Record::Endpoints,
                               ExecutionPolicy{static_cast<int>(state.range(0))}};
  for (auto _ : state) benchmark::DoNotOptimize(cocoa::runCocoa(a, y, spec, cfg, opts));
}
BENCHMARK(BM_CocoaNodes)->Arg(1)->Arg(0)->ArgName("workers")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
