#include <benchmark/benchmark.h>

#include "hydroloop/calibration.hpp"
#include "hydroloop/netsim.hpp"

using namespace hydroloop;

namespace {

const Calibration& calibration() {
    static const auto c = load_calibration(std::filesystem::path(HYDROLOOP_BENCH_DATA_DIR) / "default_calibration.json");
    return c;
}

void BM_PlantStep(benchmark::State& state) {
    const auto truth = calibration().truth_plant();
    plant::PlantState s;
    double u = 0.4;
    for (auto _ : state) {
        s = plant::plant_step(s, u, 5e-4, truth);
        if (std::abs(s.x) > 0.1) u = -u;
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_PlantStep);

void BM_RunInprocess(benchmark::State& state) {
    auto sc = netsim::load_scenario(std::filesystem::path(HYDROLOOP_BENCH_DATA_DIR) / "scenarios" / "wifi.json");
    twodof::TwoDofConfig cfg;
    cfg.gains = {12.7524, 31.1757, 0.147171};
    cfg.omega_o = 5.139;
    twodof::SetpointFilter sp;
    sp.tau_sp = 1.092;
    const auto truth = calibration().truth_plant();
    for (auto _ : state) benchmark::DoNotOptimize(netsim::run_inprocess(sc, cfg, sp, truth));
    state.SetLabel(std::to_string(sc.ticks()) + " ticks");
}
BENCHMARK(BM_RunInprocess)->Unit(benchmark::kMillisecond);

}  // namespace
