#include <benchmark/benchmark.h>

#include "torusflow/flow_map.hpp"
#include "torusflow/presets.hpp"

namespace {

using namespace torusflow;

void BM_FlowAdvance(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const VelocityPath path = VelocityPath::steady(presets::taylor_green(32));
  for (auto _ : state) {
    benchmark::DoNotOptimize(advance_flow(FlowMap::identity(grid), path, 0.0, 0.05, 0.01));
  }
  state.SetItemsProcessed(state.iterations() * grid * grid * 5);
}
BENCHMARK(BM_FlowAdvance)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_VolumeDefect(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const VelocityPath path = VelocityPath::steady(presets::taylor_green(16));
  const FlowMap flow = advance_flow(FlowMap::identity(grid), path, 0.0, 0.2, 0.02);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow.max_volume_defect());
  }
}
BENCHMARK(BM_VolumeDefect)->Arg(64)->Arg(128);

}  // namespace
