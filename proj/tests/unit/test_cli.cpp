#include <cstdlib>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "hydroloop/netloop.hpp"
#include "hydroloop/netsim.hpp"
#include "hydroloop/report.hpp"
#include "svg.hpp"
#include "test_support.hpp"

using namespace hydroloop;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Linearized and tuned report shared by the simulate and netloop tests.
const fs::path& tuned_report() {
    static fixture::TempDir dir("cli_shared");
    static const fs::path path = [] {
        const auto p = dir / "report.json";
        invoke({"linearize", "--config", fixture::default_calibration_path().string(), "--report", p.string()});
        invoke({"tune", "--report", p.string()});
        return p;
    }();
    return path;
}

void write_samples(const fs::path& p, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> g(4.0, 0.01);
    std::ofstream f(p);
    f << "rtt\n";
    f.precision(17);
    for (std::size_t i = 0; i < n; ++i) f << 0.01 + g(rng) << "\n";
}

double printed(const std::string& text, const std::string& label) {
    const std::regex re(label + R"(\s+([-+0-9.eE]+))");
    std::smatch m;
    if (!std::regex_search(text, m, re)) return NAN;
    return std::stod(m[1]);
}

}  // namespace

TEST(Cli, UsageErrorsMapToBadData) {
    EXPECT_EQ(invoke({}).code, 5);
    EXPECT_EQ(invoke({"frobnicate"}).code, 5);
    EXPECT_EQ(invoke({"tune"}).code, 5);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, LinearizeWritesReportAndIsDeterministic) {
    fixture::TempDir dir("cli_lin");
    const auto cal = fixture::default_calibration_path().string();
    const auto a = invoke({"linearize", "--config", cal, "--report", (dir / "a.json").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_NE(a.out.find("948"), std::string::npos) << a.out;
    invoke({"linearize", "--config", cal, "--report", (dir / "b.json").string()});
    EXPECT_EQ(fixture::read_file(dir / "a.json"), fixture::read_file(dir / "b.json"));
    const auto r = load_report(dir / "a.json");
    ASSERT_TRUE(r.linearization.has_value());
    EXPECT_EQ(r.consistency_error(), "");
    EXPECT_LT(fixture::rel_err(r.linearization->numerator[0], 8.255e5), 5e-3);
}

TEST(Cli, LinearizeNamesMissingKey) {
    fixture::TempDir dir("cli_missing");
    auto j = nlohmann::json::parse(fixture::read_file(fixture::default_calibration_path()));
    j["plant"].erase("K");
    std::ofstream(dir / "cal.json") << j.dump(2);
    const auto r = invoke({"linearize", "--config", (dir / "cal.json").string(), "--report", (dir / "r.json").string()});
    EXPECT_EQ(r.code, 5);
    EXPECT_NE(r.err.find("plant.K"), std::string::npos) << r.err;
}

TEST(Cli, LinearizeReportsParseLine) {
    fixture::TempDir dir("cli_parse");
    std::ofstream(dir / "cal.json") << "{\n\"plant\": {\n\"m\": 4.0\n\"E\": 1\n}\n}\n";
    const auto r = invoke({"linearize", "--config", (dir / "cal.json").string(), "--report", (dir / "r.json").string()});
    EXPECT_EQ(r.code, 5);
    EXPECT_NE(r.err.find("cal.json:4"), std::string::npos) << r.err;
}

TEST(Cli, TuneFillsEveryStageAndReportsVerdict) {
    const auto r = load_report(tuned_report());
    ASSERT_TRUE(r.synthesis && r.robust && r.controller);
    EXPECT_GE(r.synthesis->gains.ki, 29.0);
    EXPECT_GE(r.synthesis->tangencies.size(), 2u);
    fixture::TempDir dir("cli_tune");
    fs::copy_file(tuned_report(), dir / "r.json");
    const auto run = invoke({"tune", "--report", (dir / "r.json").string()});
    EXPECT_EQ(run.code, r.robust->robust ? 0 : 2);
    EXPECT_NE(run.out.find("robust margin"), std::string::npos);
    EXPECT_EQ(fixture::read_file(dir / "r.json"), fixture::read_file(tuned_report()));
}

TEST(Cli, TuneNeedsLinearization) {
    fixture::TempDir dir("cli_nolin");
    DesignReport r;
    r.calibration = fixture::default_calibration();
    save_report(r, dir / "r.json");
    EXPECT_EQ(invoke({"tune", "--report", (dir / "r.json").string()}).code, 5);
}

TEST(Cli, TuneNearUnityBoundGivesDefiniteVerdict) {
    fixture::TempDir dir("cli_ms");
    fs::copy_file(tuned_report(), dir / "r.json");
    const auto run = invoke({"tune", "--report", (dir / "r.json").string(), "--ms", "1.01"});
    EXPECT_TRUE(run.code == 0 || run.code == 2) << run.code;
}

TEST(Cli, GridEnvironmentOverride) {
    fixture::TempDir dir("cli_grid");
    fs::copy_file(tuned_report(), dir / "r.json");
    ::setenv("HYDROLOOP_GRID", "12", 1);
    EXPECT_EQ(invoke({"tune", "--report", (dir / "r.json").string()}).code, 5);
    ::setenv("HYDROLOOP_GRID", "4000", 1);
    EXPECT_EQ(cli::grid_from_env().size(), 4000u);
    ::unsetenv("HYDROLOOP_GRID");
    EXPECT_EQ(cli::grid_from_env().size(), 2000u);
}

TEST(Cli, SimulateWritesTraceAndPlotsDeterministically) {
    fixture::TempDir dir("cli_sim");
    const auto sc = fixture::scenario_path("wifi").string();
    const auto a = invoke({"simulate", "--report", tuned_report().string(), "--scenario", sc, "--out",
                        (dir / "a").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    invoke({"simulate", "--report", tuned_report().string(), "--scenario", sc, "--out", (dir / "b").string()});
    EXPECT_EQ(fixture::read_file(dir / "a.csv"), fixture::read_file(dir / "b.csv"));
    for (const char* suffix : {"_position.svg", "_control.svg", "_pressure.svg"}) {
        const auto svg = fixture::read_file(dir / (std::string("a") + suffix));
        EXPECT_EQ(svg.rfind("<svg", 0), 0u) << suffix;
        EXPECT_NE(svg.find("</svg>"), std::string::npos);
    }
    const auto trace = netsim::trace_from_csv(fixture::read_file(dir / "a.csv"));
    EXPECT_EQ(trace.rows.size(), 2001u);
    EXPECT_NE(a.out.find("overshoot"), std::string::npos);
}

TEST(Cli, SimulateFlagsOverrideScenario) {
    fixture::TempDir dir("cli_flags");
    const auto sc = fixture::scenario_path("wifi").string();
    invoke({"simulate", "--report", tuned_report().string(), "--scenario", sc, "--out", (dir / "on").string()});
    invoke({"simulate", "--report", tuned_report().string(), "--scenario", sc, "--out", (dir / "off").string(),
         "--spfilter", "off"});
    invoke({"simulate", "--report", tuned_report().string(), "--scenario", sc, "--out", (dir / "seed").string(),
         "--seed", "99"});
    const auto on = fixture::read_file(dir / "on.csv");
    EXPECT_NE(on, fixture::read_file(dir / "off.csv"));
    EXPECT_NE(on, fixture::read_file(dir / "seed.csv"));
    EXPECT_EQ(invoke({"simulate", "--report", tuned_report().string(), "--scenario", sc, "--out",
                   (dir / "x").string(), "--spfilter", "maybe"})
                  .code,
              5);
}

TEST(Cli, SimulateDivergenceExitsThreeWithPartialTrace) {
    fixture::TempDir dir("cli_div");
    auto r = load_report(tuned_report());
    r.controller->config.gains = {-5.0, -1.0, 0.0};
    save_report(r, dir / "r.json");
    auto sc = netsim::load_scenario(fixture::scenario_path("ethernet"));
    sc.divergence_limit = 0.15;
    sc.spfilter = false;
    std::ofstream(dir / "s.json") << netsim::to_json(sc).dump(2);
    const auto run = invoke({"simulate", "--report", (dir / "r.json").string(), "--scenario", (dir / "s.json").string(),
                          "--out", (dir / "t").string()});
    EXPECT_EQ(run.code, 3) << run.err;
    const auto trace = netsim::trace_from_csv(fixture::read_file(dir / "t.csv"));
    EXPECT_GT(trace.rows.size(), 1u);
    EXPECT_LT(trace.rows.size(), 2001u);
}

TEST(Cli, SimulateNeedsTunedReport) {
    fixture::TempDir dir("cli_untuned");
    invoke({"linearize", "--config", fixture::default_calibration_path().string(), "--report", (dir / "r.json").string()});
    const auto run = invoke({"simulate", "--report", (dir / "r.json").string(), "--scenario",
                          fixture::scenario_path("ethernet").string(), "--out", (dir / "t").string()});
    EXPECT_EQ(run.code, 5);
    EXPECT_NE(run.err.find("tune"), std::string::npos);
}

TEST(Cli, RttfitRecoversSyntheticLaw) {
    fixture::TempDir dir("cli_rtt");
    write_samples(dir / "rtt.csv", 5000, 21);
    fs::copy_file(tuned_report(), dir / "r.json");
    const auto run = invoke({"rttfit", (dir / "rtt.csv").string(), "--report", (dir / "r.json").string(), "--out",
                          (dir / "fit").string()});
    ASSERT_EQ(run.code, 0) << run.err;
    const double shape = printed(run.out, "shape");
    const double scale = printed(run.out, "scale");
    EXPECT_LT(fixture::rel_err(shape, 4.0), 0.1);
    EXPECT_LT(fixture::rel_err(scale, 0.01), 0.1);
    const auto r = load_report(dir / "r.json");
    ASSERT_TRUE(r.rtt.has_value());
    EXPECT_DOUBLE_EQ(printed(run.out, "tau_nom"), std::stod([&] {
                         std::ostringstream o;
                         o.precision(6);
                         o << r.rtt->tau_min + r.rtt->shape * r.rtt->scale;
                         return o.str();
                     }()));
    EXPECT_TRUE(fs::exists(dir / "fit.svg"));
}

TEST(Cli, RttfitTooFewSamplesExitsFive) {
    fixture::TempDir dir("cli_rtt10");
    write_samples(dir / "rtt.csv", 10, 1);
    EXPECT_EQ(invoke({"rttfit", (dir / "rtt.csv").string()}).code, 5);
}

TEST(Cli, NetloopControllerWithoutServerExitsFour) {
    std::uint16_t port = 0;
    {
        auto l = netsim::listen_tcp({"127.0.0.1", 0});
        port = netsim::local_port(l);
    }
    const auto run = invoke({"netloop", "controller", "--address", "127.0.0.1:" + std::to_string(port), "--report",
                          tuned_report().string(), "--scenario", fixture::scenario_path("loopback").string(),
                          "--timeout", "200"});
    EXPECT_EQ(run.code, 4) << run.err;
}

TEST(Cli, NetloopTwoProcessesOnLoopback) {
    fixture::TempDir dir("cli_net");
    auto sc = netsim::load_scenario(fixture::scenario_path("loopback"));
    sc.duration = 1.0;
    std::ofstream(dir / "s.json") << netsim::to_json(sc).dump(2);
    const std::string bin = HYDROLOOP_CLI_PATH;
    const auto log = dir / "plant.log";
    const std::string plant_cmd = bin + " netloop plant --address 127.0.0.1:0 --report " + tuned_report().string() +
                                  " --scenario " + (dir / "s.json").string() + " --out " + (dir / "net").string() +
                                  " > " + log.string() + " 2>&1; echo $? > " + (dir / "plant.rc").string();
    ASSERT_EQ(std::system(("(" + plant_cmd + ") &").c_str()), 0);
    std::string port;
    for (int i = 0; i < 100 && port.empty(); ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        std::smatch m;
        const auto text = fixture::read_file(log);
        if (std::regex_search(text, m, std::regex(R"(listening on [0-9.]+:([0-9]+))"))) port = m[1];
    }
    ASSERT_FALSE(port.empty());
    const int ctrl = std::system((bin + " netloop controller --address 127.0.0.1:" + port + " --report " +
                                  tuned_report().string() + " --scenario " + (dir / "s.json").string() + " > " +
                                  (dir / "ctrl.log").string() + " 2>&1")
                                     .c_str());
    EXPECT_EQ(WEXITSTATUS(ctrl), 0);
    for (int i = 0; i < 100 && !fs::exists(dir / "plant.rc"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    EXPECT_EQ(std::stoi(fixture::read_file(dir / "plant.rc")), 0);
    const auto trace = netsim::trace_from_csv(fixture::read_file(dir / "net.csv"));
    EXPECT_EQ(trace.rows.size(), 101u);
    EXPECT_TRUE(netsim::check_trace(trace, 0.01).empty());
}

TEST(Svg, DeterministicAndEscaped) {
    cli::Plot p{"a < b & c", "t", "y", "", {{"s", {0.0, 1.0, 2.0}, {1.0, NAN, 3.0}}}};
    const auto a = cli::render_svg(p);
    EXPECT_EQ(a, cli::render_svg(p));
    EXPECT_NE(a.find("a &lt; b &amp; c"), std::string::npos);
    EXPECT_EQ(a.find("nan"), std::string::npos);
}
