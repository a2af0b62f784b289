// Serial reference executor against the OpenMP executor on a small grid.
#include <benchmark/benchmark.h>

#include "bbrsim/sweep.hpp"

namespace {

std::vector<bbrsim::ExperimentConfig> bench_cells() {
  bbrsim::SweepGrid grid;
  grid.cca = {bbrsim::CcaKind::Bbr3, bbrsim::CcaKind::Cubic};
  grid.slice_ms = {1.0, 10.0};
  grid.share_pct = {25.0, 50.0};
  grid.base.reps = 4;
  grid.base.duration_s = 5.0;
  return grid.expand();
}

void BM_SweepSerial(benchmark::State& state) {
  const auto cells = bench_cells();
  for (auto _ : state) benchmark::DoNotOptimize(bbrsim::run_sweep_serial(cells));
  state.counters["runs"] = static_cast<double>(cells.size() * 4);
}

void BM_SweepParallel(benchmark::State& state) {
  const auto cells = bench_cells();
  bbrsim::SweepOptions opt;
  opt.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bbrsim::run_sweep_parallel(cells, opt));
  state.counters["runs"] = static_cast<double>(cells.size() * 4);
}

// One 20 s run per cell type, the unit of work the executors distribute.
void BM_SingleRun(benchmark::State& state) {
  bbrsim::ExperimentConfig cfg;
  cfg.share_pct = static_cast<double>(state.range(0));
  cfg.slice_ms = 1.0;
  bbrsim::RunOptions opt;
  opt.keep_series = false;
  for (auto _ : state) benchmark::DoNotOptimize(bbrsim::run_single(cfg, 0, opt));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SingleRun)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
