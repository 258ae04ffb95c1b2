// Serial reference vs OpenMP connection-layer kernels on a PIT-sized grid.
#include "pgqr/kernels.hpp"
#include "pgqr/rng.hpp"

#include <benchmark/benchmark.h>

using namespace pgqr;

namespace {

struct Fixture {
  kernels::Connection f;
  Matrix qf, df;
  std::vector<double> thresholds;

  Fixture(Eigen::Index points, Eigen::Index levels, Eigen::Index width) : qf(levels, width), df(points, width) {
    Rng rng(42);
    f.weights.resize(width);
    for (Eigen::Index j = 0; j < width; ++j) f.weights[j] = rng.uniform01() * 0.1;
    for (Eigen::Index i = 0; i < qf.size(); ++i) qf.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < df.size(); ++i) df.data()[i] = rng.normal();
    thresholds.assign(static_cast<std::size_t>(points), 1.0);
  }
};

template <auto Kernel>
void bm_connect(benchmark::State& state) {
  Fixture fx(state.range(0), 1000, 256);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(fx.f, fx.qf, fx.df));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}

template <auto Kernel>
void bm_count(benchmark::State& state) {
  Fixture fx(state.range(0), 1000, 256);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(fx.f, fx.qf, fx.df, fx.thresholds));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}

}  // namespace

BENCHMARK(bm_connect<kernels::connect_serial>)->Name("connect/serial")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_connect<kernels::connect_parallel>)->Name("connect/omp")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_count<kernels::count_below_serial>)->Name("count_below/serial")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_count<kernels::count_below_parallel>)->Name("count_below/omp")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
