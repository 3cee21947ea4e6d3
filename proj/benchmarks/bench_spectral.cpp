#include <benchmark/benchmark.h>

#include "torusflow/fourier_multiplier.hpp"
#include "torusflow/presets.hpp"
#include "torusflow/pseudospectral.hpp"

namespace {

using namespace torusflow;

void BM_ConvectiveTerm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpectralField u = presets::random_divergence_free(n, n, 1.2, 1);
  const FftGrid grid(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(convective_term(u, grid));
  }
}
BENCHMARK(BM_ConvectiveTerm)->Arg(16)->Arg(32)->Arg(64);

void BM_LerayProjection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpectralField u = presets::random_divergence_free(n, n, 1.2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(leray_project(u));
  }
}
BENCHMARK(BM_LerayProjection)->Arg(32)->Arg(64);

void BM_SobolevNorm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpectralField u = presets::random_divergence_free(n, n, 1.2, 3);
  const SobolevIndex s(2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sobolev_norm(u, s));
  }
}
BENCHMARK(BM_SobolevNorm)->Arg(32)->Arg(64);

void BM_PointEvaluation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpectralField u = presets::random_divergence_free(n, n, 1.2, 4);
  const VelocityEvaluator eval(u);
  double phase = 0.0;
  for (auto _ : state) {
    phase += 0.37;
    benchmark::DoNotOptimize(eval({phase, 1.3 * phase}));
  }
}
BENCHMARK(BM_PointEvaluation)->Arg(16)->Arg(32)->Arg(64);

}  // namespace
