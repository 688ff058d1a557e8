#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydroloop/plant.hpp"
#include "hydroloop/twodof.hpp"
#include "hydroloop/uncertainty.hpp"

// Closed-loop execution of the truth plant and the remote controller across a
// round-trip delay channel.
namespace hydroloop::netsim {

/// Piecewise-constant reference: the value of the last breakpoint at or before t.
class ReferenceProfile {
public:
    ReferenceProfile() = default;
    explicit ReferenceProfile(std::vector<std::pair<double, double>> breakpoints);

    double at(double t) const;
    const std::vector<std::pair<double, double>>& breakpoints() const noexcept { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

enum class ChannelMode { constant, gamma };

struct ChannelConfig {
    ChannelMode mode = ChannelMode::constant;
    double rtt = 0.01;  // constant mode [s]
    uncertainty::GammaFit gamma{};
    double split = 0.5;  // share of the RTT on the measurement path

    void validate() const;
};

class DelayChannel {
public:
    DelayChannel(const ChannelConfig& cfg, std::uint64_t seed);
    double next_rtt();
    const ChannelConfig& config() const noexcept { return cfg_; }

private:
    ChannelConfig cfg_;
    std::mt19937_64 rng_;
};

struct Scenario {
    std::string name = "scenario";
    ReferenceProfile reference;
    double duration = 10.0;     // [s]
    double plant_dt = 0.0005;   // [s]
    double Ts = 0.01;           // [s]
    plant::PlantState initial{};
    ChannelConfig channel{};
    std::uint64_t seed = 1;
    bool spfilter = true;
    double divergence_limit = 1.0;  // |x| beyond this [m] aborts the run

    int steps_per_tick() const;
    std::size_t ticks() const;  // duration / Ts
    void validate() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

struct TraceRow {
    double t;
    double x_ref;
    double x;
    double v;
    double p_load;
    double u;
    double rtt;
};

struct SimTrace {
    std::vector<TraceRow> rows;
    // Plant time of the sample the controller used at each tick.
    std::vector<double> measurement_time;
    bool fault = false;
    double fault_time = 0.0;
    std::string fault_message;
    bool disconnected = false;  // socket mode: peer left before the end
};

/// Keeps the newest sample by stamp; older or repeated stamps are refused.
template <typename Stamp, typename Value>
class FreshestRegister {
public:
    bool offer(Stamp stamp, const Value& v) {
        if (has_ && !(stamp > stamp_)) return false;
        has_ = true;
        stamp_ = stamp;
        value_ = v;
        return true;
    }
    bool has_value() const noexcept { return has_; }
    Stamp stamp() const noexcept { return stamp_; }
    const Value& value() const noexcept { return value_; }

private:
    bool has_ = false;
    Stamp stamp_{};
    Value value_{};
};

/// Delayed commands keyed by plant step. A command only takes effect if it is
/// newer (by generation) than the one currently applied.
class CommandSchedule {
public:
    void push(std::uint64_t apply_step, std::uint64_t generation, double value);
    // Advance to plant step k and return the command in force.
    double at(std::uint64_t k);

private:
    struct Pending {
        std::uint64_t step;
        std::uint64_t generation;
        double value;
    };
    std::vector<Pending> pending_;
    FreshestRegister<std::uint64_t, double> applied_;
};

SimTrace run_inprocess(const Scenario& scenario, const twodof::TwoDofConfig& cfg,
                       const twodof::SetpointFilter& sp, const plant::TruthPlant& plant);

// Header t,x_ref,x,v,p_load,u,rtt; 17 significant digits.
std::string trace_to_csv(const SimTrace& trace);
SimTrace trace_from_csv(const std::string& text);

// Empty when the trace satisfies every invariant, else one message per violation.
std::vector<std::string> check_trace(const SimTrace& trace, double Ts);

struct EdgeMetrics {
    double time;          // edge instant [s]
    double amplitude;     // signed step [m]
    double overshoot;     // fraction of |amplitude|, >= 0
    double settling_time; // time to stay inside the 2% band [s], infinity if never
    double final_error;   // |x - target| at the end of the edge window [m]
};

std::vector<EdgeMetrics> edge_metrics(const SimTrace& trace, const ReferenceProfile& ref, double band = 0.02);

}  // namespace hydroloop::netsim
