#include "hydroloop/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "hydroloop/error.hpp"
#include "json_access.hpp"

namespace hydroloop::netsim {

using detail::number_or;
using detail::require;
using detail::require_number;

ReferenceProfile::ReferenceProfile(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i].first) || !std::isfinite(points_[i].second))
            throw ValidationError("reference: non-finite breakpoint");
        if (i > 0 && !(points_[i].first > points_[i - 1].first))
            throw ValidationError("reference: breakpoint times must increase strictly");
    }
}

double ReferenceProfile::at(double t) const {
    double v = 0.0;
    for (const auto& [tb, xb] : points_) {
        if (tb > t + 1e-12) break;
        v = xb;
    }
    return v;
}

void ChannelConfig::validate() const {
    if (!(split >= 0.0 && split <= 1.0)) throw ValidationError("channel: split must lie in [0, 1]");
    if (mode == ChannelMode::constant) {
        if (!(rtt >= 0.0) || !std::isfinite(rtt)) throw ValidationError("channel: rtt must be >= 0");
    } else {
        gamma.validate();
    }
}

DelayChannel::DelayChannel(const ChannelConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg_.validate(); }

double DelayChannel::next_rtt() {
    if (cfg_.mode == ChannelMode::constant) return cfg_.rtt;
    return uncertainty::sample_rtt(cfg_.gamma, rng_);
}

int Scenario::steps_per_tick() const { return static_cast<int>(std::lround(Ts / plant_dt)); }

std::size_t Scenario::ticks() const { return static_cast<std::size_t>(std::llround(duration / Ts)); }

void Scenario::validate() const {
    if (!(duration > 0.0) || !(plant_dt > 0.0) || !(Ts > 0.0))
        throw ValidationError("scenario: duration, plant_dt and Ts must be > 0");
    const double ratio = Ts / plant_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
        throw ValidationError("scenario: Ts must be an integer multiple of plant_dt");
    if (!(divergence_limit > 0.0)) throw ValidationError("scenario: divergence_limit must be > 0");
    channel.validate();
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    if (const auto it = j.find("name"); it != j.end() && it->is_string()) s.name = it->get<std::string>();
    s.duration = require_number(j, "", "duration");
    s.plant_dt = number_or(j, "plant_dt", s.plant_dt);
    s.Ts = number_or(j, "Ts", s.Ts);
    s.divergence_limit = number_or(j, "divergence_limit", s.divergence_limit);

    const auto& ref = require(j, "", "reference");
    if (!ref.is_array()) throw ValidationError("key reference must be an array of [time, position] pairs");
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : ref) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ValidationError("reference entries must be [time, position] number pairs");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    s.reference = ReferenceProfile(std::move(pts));

    if (const auto it = j.find("initial"); it != j.end()) {
        s.initial.x = number_or(*it, "x", 0.0);
        s.initial.v = number_or(*it, "v", 0.0);
        s.initial.p_load = number_or(*it, "p_load", 0.0);
    }

    const auto& ch = require(j, "", "channel");
    const auto& mode = require(ch, "channel", "mode");
    if (!mode.is_string()) throw ValidationError("key channel.mode must be a string");
    const auto m = mode.get<std::string>();
    if (m == "constant") {
        s.channel.mode = ChannelMode::constant;
        s.channel.rtt = require_number(ch, "channel", "rtt");
    } else if (m == "gamma") {
        s.channel.mode = ChannelMode::gamma;
        s.channel.gamma.shape = require_number(ch, "channel", "shape");
        s.channel.gamma.scale = require_number(ch, "channel", "scale");
        s.channel.gamma.tau_min = number_or(ch, "tau_min", s.channel.gamma.tau_min);
        s.channel.gamma.quantum = number_or(ch, "quantum", s.channel.gamma.quantum);
        s.channel.gamma.tau_max = number_or(ch, "tau_max", s.channel.gamma.tau_max);
    } else {
        throw ValidationError("channel.mode must be 'constant' or 'gamma', got '" + m + "'");
    }
    s.channel.split = number_or(ch, "split", s.channel.split);

    if (const auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned()) throw ValidationError("key seed must be a non-negative integer");
        s.seed = it->get<std::uint64_t>();
    }
    if (const auto it = j.find("spfilter"); it != j.end()) {
        if (!it->is_boolean()) throw ValidationError("key spfilter must be true or false");
        s.spfilter = it->get<bool>();
    }
    s.validate();
    return s;
}

nlohmann::json to_json(const Scenario& s) {
    nlohmann::json ref = nlohmann::json::array();
    for (const auto& [t, x] : s.reference.breakpoints()) ref.push_back({t, x});
    nlohmann::json ch = {{"split", s.channel.split}};
    if (s.channel.mode == ChannelMode::constant) {
        ch["mode"] = "constant";
        ch["rtt"] = s.channel.rtt;
    } else {
        ch["mode"] = "gamma";
        ch["shape"] = s.channel.gamma.shape;
        ch["scale"] = s.channel.gamma.scale;
        ch["tau_min"] = s.channel.gamma.tau_min;
        ch["quantum"] = s.channel.gamma.quantum;
        ch["tau_max"] = s.channel.gamma.tau_max;
    }
    return {{"name", s.name},
            {"duration", s.duration},
            {"plant_dt", s.plant_dt},
            {"Ts", s.Ts},
            {"divergence_limit", s.divergence_limit},
            {"reference", ref},
            {"initial", {{"x", s.initial.x}, {"v", s.initial.v}, {"p_load", s.initial.p_load}}},
            {"channel", ch},
            {"seed", s.seed},
            {"spfilter", s.spfilter}};
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(detail::read_json_file(path)); }

void CommandSchedule::push(std::uint64_t apply_step, std::uint64_t generation, double value) {
    pending_.push_back({apply_step, generation, value});
}

double CommandSchedule::at(std::uint64_t k) {
    auto due = [k](const Pending& p) { return p.step <= k; };
    for (const auto& p : pending_)
        if (due(p)) applied_.offer(p.generation, p.value);
    pending_.erase(std::remove_if(pending_.begin(), pending_.end(), due), pending_.end());
    return applied_.has_value() ? applied_.value() : 0.0;
}

namespace {

std::uint64_t delay_steps(double delay, double dt) {
    return static_cast<std::uint64_t>(std::max(0.0, std::ceil(delay / dt - 1e-9)));
}

}  // namespace

SimTrace run_inprocess(const Scenario& scenario, const twodof::TwoDofConfig& cfg, const twodof::SetpointFilter& sp,
                       const plant::TruthPlant& plant) {
    scenario.validate();
    twodof::Controller controller(cfg, scenario.spfilter ? sp : twodof::SetpointFilter{});
    DelayChannel channel(scenario.channel, scenario.seed);
    const auto spt = static_cast<std::uint64_t>(scenario.steps_per_tick());
    const std::size_t ticks = scenario.ticks();
    const double dt = scenario.plant_dt;

    SimTrace trace;
    trace.rows.reserve(ticks + 1);
    std::vector<double> x_hist;
    x_hist.reserve(ticks * spt + 1);
    x_hist.push_back(scenario.initial.x);

    plant::PlantState state = scenario.initial;
    CommandSchedule commands;
    FreshestRegister<std::uint64_t, double> measurement;
    std::uint64_t k = 0;

    for (std::size_t n = 0; n <= ticks; ++n) {
        const double t = static_cast<double>(n) * scenario.Ts;
        const double rtt = channel.next_rtt();
        const double md = scenario.channel.split * rtt;
        const std::uint64_t now = n * spt;
        const std::uint64_t lag = delay_steps(md, dt);
        const std::uint64_t sample = now >= lag ? now - lag : 0;
        measurement.offer(sample, x_hist[sample]);

        const double x_ref = scenario.reference.at(t);
        const double u = controller.step(x_ref, measurement.value());
        const double drive = twodof::inverse_deadzone(u, cfg.deadzone);
        commands.push(now + delay_steps(rtt - md, dt), n, drive);

        trace.rows.push_back({t, x_ref, state.x, state.v, state.p_load, u, rtt});
        trace.measurement_time.push_back(static_cast<double>(measurement.stamp()) * dt);
        if (n == ticks) break;

        try {
            for (std::uint64_t i = 0; i < spt; ++i, ++k) {
                state = plant::plant_step(state, commands.at(k), dt, plant, static_cast<double>(k) * dt);
                x_hist.push_back(state.x);
                if (std::abs(state.x) > scenario.divergence_limit) {
                    std::ostringstream msg;
                    msg << "position " << state.x << " m exceeds the divergence limit at t = "
                        << static_cast<double>(k + 1) * dt << " s";
                    throw IntegrationError(msg.str(), static_cast<double>(k + 1) * dt);
                }
            }
        } catch (const IntegrationError& e) {
            trace.fault = true;
            trace.fault_time = e.time();
            trace.fault_message = e.what();
            break;
        }
    }
    return trace;
}

std::string trace_to_csv(const SimTrace& trace) {
    std::string out = "t,x_ref,x,v,p_load,u,rtt\n";
    char buf[64];
    for (const auto& r : trace.rows) {
        const double cols[] = {r.t, r.x_ref, r.x, r.v, r.p_load, r.u, r.rtt};
        for (std::size_t c = 0; c < 7; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", cols[c]);
            out += buf;
            out += c + 1 < 7 ? ',' : '\n';
        }
    }
    return out;
}

SimTrace trace_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,x_ref,x,v,p_load,u,rtt")
        throw ValidationError("trace CSV: missing or unexpected header");
    SimTrace trace;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        double cols[7];
        const char* p = line.c_str();
        for (int c = 0; c < 7; ++c) {
            char* end = nullptr;
            cols[c] = std::strtod(p, &end);
            const char expect = c < 6 ? ',' : '\0';
            if (end == p || *end != expect) {
                std::ostringstream msg;
                msg << "trace CSV line " << line_no << ": malformed row";
                throw ValidationError(msg.str());
            }
            p = end + (c < 6 ? 1 : 0);
        }
        trace.rows.push_back({cols[0], cols[1], cols[2], cols[3], cols[4], cols[5], cols[6]});
    }
    return trace;
}

std::vector<std::string> check_trace(const SimTrace& trace, double Ts) {
    std::vector<std::string> issues;
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        const auto& r = trace.rows[i];
        for (double v : {r.t, r.x_ref, r.x, r.v, r.p_load, r.u, r.rtt}) {
            if (!std::isfinite(v)) {
                issues.push_back("row " + std::to_string(i) + ": non-finite value");
                break;
            }
        }
        if (r.rtt < 0.0) issues.push_back("row " + std::to_string(i) + ": negative rtt");
        if (i > 0) {
            const double step = r.t - trace.rows[i - 1].t;
            if (!(step > 0.0) || std::abs(step - Ts) > 1e-6 * Ts + 1e-12)
                issues.push_back("row " + std::to_string(i) + ": time step differs from Ts");
        }
    }
    return issues;
}

std::vector<EdgeMetrics> edge_metrics(const SimTrace& trace, const ReferenceProfile& ref, double band) {
    std::vector<EdgeMetrics> out;
    const auto& bp = ref.breakpoints();
    double level = 0.0;
    for (std::size_t e = 0; e < bp.size(); ++e) {
        const double target = bp[e].second;
        const double amp = target - level;
        const double t0 = bp[e].first;
        const double t1 = e + 1 < bp.size() ? bp[e + 1].first : std::numeric_limits<double>::infinity();
        level = target;
        if (amp == 0.0) continue;

        EdgeMetrics m{t0, amp, 0.0, 0.0, 0.0};
        double last_outside = t0;
        bool seen = false;
        for (const auto& r : trace.rows) {
            if (r.t < t0 - 1e-12 || r.t >= t1 - 1e-12) continue;
            seen = true;
            const double err = r.x - target;
            m.overshoot = std::max(m.overshoot, (amp > 0.0 ? err : -err) / std::abs(amp));
            if (std::abs(err) > band * std::abs(amp)) last_outside = r.t;
            m.final_error = std::abs(err);
        }
        if (!seen) continue;
        m.settling_time = m.final_error > band * std::abs(amp) ? std::numeric_limits<double>::infinity()
                                                               : last_outside - t0;
        out.push_back(m);
    }
    return out;
}

}  // namespace hydroloop::netsim
