#include <benchmark/benchmark.h>

#include "torusflow/sde/chart.hpp"
#include "torusflow/sde/integrator.hpp"
#include "torusflow/sde/problem.hpp"

namespace {

using namespace torusflow::sde;

void BM_SphereStep(benchmark::State& state) {
  const SdeProblem sphere = problems::sphere_brownian();
  Vec x = {0.0, 0.0, 1.0};
  const Vec db = {1e-2, -2e-2, 5e-3};
  for (auto _ : state) {
    x = sde_step(sphere, x, db, 1e-3);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_SphereStep);

void BM_ChartStep(benchmark::State& state) {
  const SdeProblem in_chart = push_forward(problems::sphere_brownian(), stereographic_north());
  Vec y = {0.2, -0.1};
  const Vec db = {1e-2, -2e-2, 5e-3};
  for (auto _ : state) {
    y = sde_step(in_chart, y, db, 1e-3, false);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_ChartStep);

void BM_ExitTimeSample(benchmark::State& state) {
  const SdeProblem bm = problems::interval_brownian();
  std::uint64_t path = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_exit_time(bm, {0.0}, 5, path++, 1e-3, 10.0));
  }
}
BENCHMARK(BM_ExitTimeSample)->Unit(benchmark::kMicrosecond);

}  // namespace
