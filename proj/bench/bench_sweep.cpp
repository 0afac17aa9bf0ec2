// Serial reference vs OpenMP sweep on the paper-default subsidised grid.

#include <benchmark/benchmark.h>

#include "cascade/harness.hpp"

namespace {

void BM_SweepSerial(benchmark::State& state) {
  const auto cfg = cascade::paper_sweep_config(true);
  for (auto _ : state) benchmark::DoNotOptimize(cascade::run_sweep_serial(cfg));
}
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);

void BM_SweepParallel(benchmark::State& state) {
  const auto cfg = cascade::paper_sweep_config(true);
  const cascade::SweepOptions opt{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(cascade::run_sweep(cfg, opt));
}
BENCHMARK(BM_SweepParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
