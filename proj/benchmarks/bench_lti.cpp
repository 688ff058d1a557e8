#include <benchmark/benchmark.h>

#include "hydroloop/lti.hpp"

using namespace hydroloop;

namespace {

const lti::TransferFunction plant({8.255e5}, {0.0, 2.219e6, 948.0, 1.0}, 0.03);

void BM_FreqResponse(benchmark::State& state) {
    const auto grid = lti::FrequencyGrid::default_grid(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lti::freq_response(plant, grid));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FreqResponse)->Arg(2000)->Arg(20000)->Arg(200000);

void BM_HinfNorm(benchmark::State& state) {
    const auto grid = lti::FrequencyGrid::default_grid();
    for (auto _ : state)
        benchmark::DoNotOptimize(lti::hinf_norm(grid, [](double w) { return std::abs(plant.at(w)); }));
}
BENCHMARK(BM_HinfNorm);

void BM_Nyquist(benchmark::State& state) {
    const lti::TransferFunction c({31.18, 12.75, 0.1472}, {0.0, 1.0});
    const auto L = lti::series(c, plant);
    for (auto _ : state)
        benchmark::DoNotOptimize(lti::nyquist_check([&](double w) { return L.at(w); }, 2, 1e-2, 1e4));
}
BENCHMARK(BM_Nyquist)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
