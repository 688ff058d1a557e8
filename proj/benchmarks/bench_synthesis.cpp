#include <benchmark/benchmark.h>

#include "hydroloop/synthesis.hpp"

using namespace hydroloop;

namespace {

const lti::TransferFunction plant({8.255e5}, {0.0, 2.219e6, 948.0, 1.0}, 0.03);

void BM_MinConstraint(benchmark::State& state) {
    const auto grid = lti::FrequencyGrid::default_grid(static_cast<std::size_t>(state.range(0)));
    const synthesis::PidGains g{12.75, 31.18, 0.1472};
    for (auto _ : state) benchmark::DoNotOptimize(synthesis::min_constraint(g, plant, grid));
}
BENCHMARK(BM_MinConstraint)->Arg(2000)->Arg(20000);

void BM_FindFeasible(benchmark::State& state) {
    const synthesis::RobustSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(synthesis::find_feasible(plant, spec, 20.0));
}
BENCHMARK(BM_FindFeasible)->Unit(benchmark::kMillisecond);

void BM_MaximizeKi(benchmark::State& state) {
    synthesis::RobustSpec spec;
    spec.M_s = static_cast<double>(state.range(0)) / 100.0;
    for (auto _ : state) benchmark::DoNotOptimize(synthesis::maximize_ki(plant, spec));
}
BENCHMARK(BM_MaximizeKi)->Arg(110)->Arg(130)->Unit(benchmark::kMillisecond);

}  // namespace
