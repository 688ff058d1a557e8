#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hydroloop/calibration.hpp"
#include "hydroloop/error.hpp"
#include "hydroloop/netloop.hpp"
#include "hydroloop/netsim.hpp"
#include "hydroloop/report.hpp"
#include "hydroloop/synthesis.hpp"
#include "hydroloop/twodof.hpp"
#include "hydroloop/uncertainty.hpp"
#include "svg.hpp"

namespace hydroloop::cli {

namespace fs = std::filesystem;

lti::FrequencyGrid grid_from_env() {
    const char* env = std::getenv("HYDROLOOP_GRID");
    if (env == nullptr || *env == '\0') return lti::FrequencyGrid::default_grid();
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 100 || n > 1000000)
        throw ValidationError(std::string("HYDROLOOP_GRID must be an integer in [100, 1000000], got '") + env + "'");
    return lti::FrequencyGrid::default_grid(static_cast<std::size_t>(n));
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path.string());
    f << text;
    if (!f) throw ValidationError("write failed: " + path.string());
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) { return fs::path(prefix + suffix); }

std::string poly_text(const std::vector<double>& c) {
    std::ostringstream o;
    o << std::setprecision(7);
    bool first = true;
    for (std::size_t k = c.size(); k-- > 0;) {
        if (c[k] == 0.0) continue;
        if (!first) o << " + ";
        first = false;
        if (k == 0 || c[k] != 1.0) o << c[k];
        if (k >= 1) o << (k == 0 || c[k] != 1.0 ? " " : "") << "s";
        if (k >= 2) o << "^" << k;
    }
    return first ? "0" : o.str();
}

DesignReport require_controller(const fs::path& report_path) {
    auto r = load_report(report_path);
    if (!r.controller) throw ValidationError(report_path.string() + ": report has no controller section; run tune first");
    return r;
}

// ---------------------------------------------------------------- linearize

int cmd_linearize(const std::string& config, const std::string& report_path, std::ostream& out) {
    DesignReport r;
    r.calibration = load_calibration(config);
    const auto& p = r.calibration.plant;
    LinearizationSection l;
    l.nominal = uncertainty::nominal_gains(p, r.calibration.range);
    l.poles = uncertainty::pole_params(l.nominal, p);
    const auto P = plant::nominal_tf(p, l.nominal, r.calibration.delay.tau_nom);
    l.numerator = P.numerator();
    l.denominator = P.denominator();
    l.delay = P.delay();
    l.deviation = uncertainty::deviation_scan(p, r.calibration.range, l.nominal);
    r.linearization = l;
    save_report(r, report_path);

    const auto& d = l.deviation;
    out << std::setprecision(6);
    out << "nominal gains   C_q = " << l.nominal.C_q << " m^3/s   C_qp = " << l.nominal.C_qp << " m^3/s/Pa\n";
    out << "P_nom(s)        (" << poly_text(l.numerator) << ") / (" << poly_text(l.denominator) << ") e^(-"
        << l.delay << " s)\n";
    out << "pole form       k = " << l.poles.k << "   omega_n = " << l.poles.omega_n << " rad/s   xi = " << l.poles.xi
        << "\n";
    out << "max deviation   k " << 100.0 * d.k << " %   xi " << 100.0 * d.xi << " %   omega_n " << 100.0 * d.omega_n
        << " %\n";
    out << "k ratio max     " << d.k_ratio_max() << "\n";
    out << "report          " << report_path << "\n";
    return ok;
}

// --------------------------------------------------------------------- tune

int cmd_tune(const std::string& report_path, double ms, double taumax, std::ostream& out, std::ostream& err) {
    auto r = load_report(report_path);
    if (!r.linearization) throw ValidationError(report_path + ": report has no P_nom; run linearize first");
    if (const auto e = r.consistency_error(); !e.empty()) throw ValidationError(report_path + ": " + e);
    if (!(taumax > 0.0)) throw ValidationError("--taumax must be > 0");

    synthesis::RobustSpec spec;
    spec.M_s = ms;
    spec.grid = grid_from_env();
    spec.validate();
    const auto P = r.linearization->plant();

    r.synthesis.reset();
    r.robust.reset();
    r.controller.reset();

    synthesis::PidGains g;
    synthesis::TangencyReport tr;
    try {
        g = synthesis::maximize_ki(P, spec);
        tr = synthesis::verify_design(g, P, spec);
    } catch (const InfeasibleError& e) {
        save_report(r, report_path);
        err << "synthesis infeasible for M_s = " << ms << ": " << e.what() << "\n"
            << "best constraint violation " << e.best_violation() << "\n";
        return infeasible;
    } catch (const InstabilityError& e) {
        save_report(r, report_path);
        err << "synthesis produced an unstable loop: " << e.what() << "\n";
        return infeasible;
    }

    SynthesisSection s;
    s.M_s = ms;
    s.gains = g;
    s.min_f = tr.min_f;
    s.min_omega = tr.min_omega;
    s.achieved_M_s = tr.achieved_M_s;
    s.tangencies = tr.points;
    r.synthesis = s;

    RobustSection b;
    b.k_ratio_max = r.linearization->deviation.k_ratio_max();
    b.tau_max = taumax;
    b.weight = uncertainty::fit_weight(b.k_ratio_max, taumax, spec.grid);
    const auto margin = uncertainty::robust_stability_margin(b.weight.tf(), lti::series(g.tf(), P), spec.grid);
    b.margin = margin.peak;
    b.margin_omega = margin.omega;
    b.robust = margin.peak < 1.0;
    r.robust = b;

    ControllerSection c;
    c.config.gains = g;
    c.config.omega_o = twodof::gain_crossover(g, P, spec.grid);
    c.config.deadzone = r.calibration.valve.deadzone;
    try {
        c.setpoint = twodof::design_sp_filter(c.config, P, spec.grid);
    } catch (const InstabilityError& e) {
        save_report(r, report_path);
        err << e.what() << "\n";
        return infeasible;
    }
    r.controller = c;
    save_report(r, report_path);

    out << std::setprecision(6);
    out << "gains           kp = " << g.kp << "   ki = " << g.ki << "   kd = " << g.kd << "\n";
    out << "constraint      min f = " << std::setprecision(9) << tr.min_f << " at " << std::setprecision(6)
        << tr.min_omega << " rad/s   (r^2 = " << std::setprecision(9) << spec.r2() << ")\n"
        << std::setprecision(6);
    out << "achieved M_s    " << tr.achieved_M_s << "\n";
    out << "tangencies     ";
    for (const auto& p : tr.points) out << " " << p.omega;
    out << " rad/s\n";
    const auto& w = b.weight;
    out << "weight W_U      k_w = " << w.k_w << "   omega_z = " << w.omega_z << "   xi_z = " << w.xi_z
        << "   omega_p = " << w.omega_p << "   xi_p = " << w.xi_p << "\n";
    out << "robust margin   ||W_U T||inf = " << b.margin << " at " << b.margin_omega << " rad/s   ("
        << (b.robust ? "robustly stable" : "NOT certified") << ")\n";
    out << "2DOF runtime    omega_o = " << c.config.omega_o << " rad/s   tau_sp = " << c.setpoint.tau_sp
        << " s   max|W| = " << c.setpoint.M_w << " -> " << c.setpoint.filtered_peak << "\n";
    if (!b.robust) {
        err << "robust stability margin " << b.margin << " >= 1 for tau_max = " << taumax << " s\n";
        return infeasible;
    }
    return ok;
}

// ----------------------------------------------------------------- simulate

void write_trace_outputs(const netsim::SimTrace& trace, const std::string& prefix, const std::string& title) {
    write_file(with_suffix(prefix, ".csv"), netsim::trace_to_csv(trace));

    std::vector<double> t, xr, x, rtt, u, pl;
    for (const auto& row : trace.rows) {
        t.push_back(row.t);
        xr.push_back(row.x_ref);
        x.push_back(row.x);
        rtt.push_back(row.rtt);
        u.push_back(row.u);
        pl.push_back(row.p_load * 1e-6);
    }
    Plot pos{title + ": position", "t [s]", "x [m]", "rtt [s]",
             {{"x_ref", t, xr, "#2ca02c"}, {"x", t, x, "#1f77b4"}, {"rtt", t, rtt, "#ff7f0e", true}}};
    Plot ctl{title + ": control signal", "t [s]", "u", "", {{"u", t, u, "#d62728"}}};
    Plot prs{title + ": load pressure", "t [s]", "P_L [MPa]", "", {{"P_L", t, pl, "#9467bd"}}};
    write_file(with_suffix(prefix, "_position.svg"), render_svg(pos));
    write_file(with_suffix(prefix, "_control.svg"), render_svg(ctl));
    write_file(with_suffix(prefix, "_pressure.svg"), render_svg(prs));
}

void print_metrics(const netsim::SimTrace& trace, const netsim::ReferenceProfile& ref, std::ostream& out) {
    out << std::setprecision(4);
    for (const auto& m : netsim::edge_metrics(trace, ref)) {
        out << "edge t = " << m.time << " s   step " << m.amplitude << " m   overshoot " << 100.0 * m.overshoot
            << " %   settling ";
        if (std::isfinite(m.settling_time))
            out << m.settling_time << " s";
        else
            out << "never";
        out << "   final error " << m.final_error << " m\n";
    }
    double rtt_max = 0.0, x_max = 0.0;
    for (const auto& row : trace.rows) {
        rtt_max = std::max(rtt_max, row.rtt);
        x_max = std::max(x_max, std::abs(row.x));
    }
    out << "max rtt " << rtt_max << " s   max |x| " << x_max << " m   rows " << trace.rows.size() << "\n";
}

int cmd_simulate(const std::string& report_path, const std::string& scenario_path, const std::string& prefix,
                 const std::string& spfilter, const std::optional<std::uint64_t>& seed, std::ostream& out,
                 std::ostream& err) {
    const auto r = require_controller(report_path);
    auto sc = netsim::load_scenario(scenario_path);
    if (!spfilter.empty()) sc.spfilter = spfilter == "on";
    if (seed) sc.seed = *seed;
    sc.validate();

    const auto trace = netsim::run_inprocess(sc, r.controller->config, r.controller->setpoint,
                                             r.calibration.truth_plant());
    write_trace_outputs(trace, prefix, sc.name);
    print_metrics(trace, sc.reference, out);
    out << "trace " << with_suffix(prefix, ".csv").string() << "\n";
    if (trace.fault) {
        err << "simulation diverged at t = " << trace.fault_time << " s: " << trace.fault_message << "\n";
        return unstable;
    }
    return ok;
}

// ------------------------------------------------------------------ netloop

int cmd_netloop(const std::string& role, const std::string& address, const std::string& report_path,
                const std::string& scenario_path, const std::string& prefix, const std::string& spfilter,
                int timeout_ms, std::ostream& out, std::ostream& err) {
    const auto r = require_controller(report_path);
    auto sc = netsim::load_scenario(scenario_path);
    if (!spfilter.empty()) sc.spfilter = spfilter == "on";
    sc.validate();
    const auto ep = netsim::parse_endpoint(address);

    if (role == "controller") {
        const auto sp = sc.spfilter ? r.controller->setpoint : twodof::SetpointFilter{};
        netsim::ControllerClient client(r.controller->config, sp, sc.reference,
                                        std::chrono::milliseconds(timeout_ms));
        const auto stats = client.run(ep);
        out << "measurements " << stats.received << "   stale " << stats.stale << "   commands " << stats.commands
            << "\n";
        return ok;
    }

    netsim::PlantServer server(sc, r.calibration.truth_plant(), r.calibration.valve.deadzone);
    const auto port = server.bind(ep);
    out << "listening on " << ep.host << ":" << port << std::endl;
    const auto trace = server.serve(std::chrono::milliseconds(std::max(timeout_ms, 10000)));
    write_trace_outputs(trace, prefix, sc.name);
    std::ostringstream rtt_csv;
    rtt_csv << "sequence,rtt\n" << std::setprecision(17);
    for (const auto& rec : server.rtt_log()) rtt_csv << rec.sequence << "," << rec.rtt << "\n";
    write_file(with_suffix(prefix, "_rtt.csv"), rtt_csv.str());
    print_metrics(trace, sc.reference, out);
    out << "trace " << with_suffix(prefix, ".csv").string() << "\n";
    if (trace.fault) {
        err << "plant diverged at t = " << trace.fault_time << " s: " << trace.fault_message << "\n";
        return unstable;
    }
    if (trace.disconnected) {
        err << "controller disconnected at t = " << (trace.rows.empty() ? 0.0 : trace.rows.back().t)
            << " s; valve forced to 0\n";
        return network;
    }
    return ok;
}

// ------------------------------------------------------------------- rttfit

std::string histogram_svg(const std::vector<double>& samples, const uncertainty::GammaFit& fit) {
    std::map<long, double> counts;
    for (double s : samples) counts[std::lround(s / fit.quantum)] += 1.0;
    const long k_lo = counts.begin()->first;
    const long k_hi = counts.rbegin()->first;

    Series hist{"samples", {}, {}, "#1f77b4"};
    hist.bars = true;
    Series model{"fitted law", {}, {}, "#d62728"};
    const double n = static_cast<double>(samples.size());
    auto cdf = [&](double tau) {
        const double e = tau - fit.tau_min;
        return e <= 0.0 ? 0.0 : boost::math::gamma_p(fit.shape, e / fit.scale);
    };
    for (long k = k_lo; k <= k_hi; ++k) {
        const double tau = static_cast<double>(k) * fit.quantum;
        const auto it = counts.find(k);
        hist.x.push_back(tau);
        hist.y.push_back(it == counts.end() ? 0.0 : it->second / n);
        model.x.push_back(tau);
        model.y.push_back(k == k_lo ? cdf(tau) : cdf(tau) - cdf(tau - fit.quantum));
    }
    return render_svg({"round-trip time distribution", "rtt [s]", "probability", "", {hist, model}});
}

int cmd_rttfit(const std::string& samples_path, const std::string& report_path, const std::string& prefix,
               std::ostream& out) {
    const auto samples = uncertainty::read_rtt_csv(samples_path);
    const auto fit = uncertainty::fit_gamma(samples);

    std::string out_prefix = prefix;
    if (out_prefix.empty()) out_prefix = (fs::path(samples_path).parent_path() / fs::path(samples_path).stem()).string() + "_fit";
    write_file(with_suffix(out_prefix, ".svg"), histogram_svg(samples, fit));
    if (!report_path.empty()) {
        auto r = load_report(report_path);
        r.rtt = fit;
        save_report(r, report_path);
    }

    out << std::setprecision(6);
    out << "samples  " << samples.size() << "\n";
    out << "shape    " << fit.shape << "\n";
    out << "scale    " << fit.scale << " s\n";
    out << "tau_min  " << fit.tau_min << " s   quantum " << fit.quantum << " s\n";
    out << "tau_nom  " << fit.tau_nom() << " s\n";
    out << "tau_max  " << fit.tau_max << " s\n";
    out << "plot     " << with_suffix(out_prefix, ".svg").string() << "\n";
    return ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust 2DOF PID toolkit for a hydraulic drive over a delayed network", "hydroloop"};
    app.require_subcommand(1);

    std::string config, report, scenario, prefix, spfilter, samples, role, address = "127.0.0.1:5555";
    double ms = 1.1, taumax = 0.11;
    std::optional<std::uint64_t> seed;
    int timeout_ms = 1000;

    auto* lin = app.add_subcommand("linearize", "Nominal plant and deviation scan from a calibration");
    lin->add_option("--config", config, "Calibration JSON")->required()->check(CLI::ExistingFile);
    lin->add_option("--report", report, "Design report to create")->required();

    auto* tune = app.add_subcommand("tune", "PID synthesis, robust verification and 2DOF runtime design");
    tune->add_option("--report", report, "Design report to update")->required()->check(CLI::ExistingFile);
    tune->add_option("--ms", ms, "Maximum sensitivity bound")->capture_default_str();
    tune->add_option("--taumax", taumax, "Worst-case delay for the uncertainty weight [s]")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "In-process closed-loop run over the delay channel");
    sim->add_option("--report", report, "Design report")->required()->check(CLI::ExistingFile);
    sim->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", prefix, "Output prefix")->required();
    sim->add_option("--spfilter", spfilter, "Override the scenario's set-point filter switch")
        ->check(CLI::IsMember({"on", "off"}));
    sim->add_option("--seed", seed, "Override the scenario seed");

    auto* net = app.add_subcommand("netloop", "Plant server or controller client over TCP");
    net->add_option("role", role, "plant or controller")->required()->check(CLI::IsMember({"plant", "controller"}));
    net->add_option("--address", address, "host:port (port 0 picks a free port)")->capture_default_str();
    net->add_option("--report", report, "Design report")->required()->check(CLI::ExistingFile);
    net->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    net->add_option("--out", prefix, "Output prefix for the plant trace")->default_str("netloop");
    net->add_option("--spfilter", spfilter, "Override the scenario's set-point filter switch")
        ->check(CLI::IsMember({"on", "off"}));
    net->add_option("--timeout", timeout_ms, "Controller receive timeout [ms]")->capture_default_str();

    auto* fit = app.add_subcommand("rttfit", "Shifted gamma fit of round-trip-time samples");
    fit->add_option("samples", samples, "CSV with one RTT per line [s]")->required()->check(CLI::ExistingFile);
    fit->add_option("--report", report, "Design report to update")->check(CLI::ExistingFile);
    fit->add_option("--out", prefix, "Output prefix for the histogram plot");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : bad_data;
    }
    if (net->parsed() && prefix.empty()) prefix = "netloop";

    try {
        if (lin->parsed()) return cmd_linearize(config, report, out);
        if (tune->parsed()) return cmd_tune(report, ms, taumax, out, err);
        if (sim->parsed()) return cmd_simulate(report, scenario, prefix, spfilter, seed, out, err);
        if (net->parsed())
            return cmd_netloop(role, address, report, scenario, prefix, spfilter, timeout_ms, out, err);
        if (fit->parsed()) return cmd_rttfit(samples, report, prefix, out);
    } catch (const NetworkError& e) {
        err << "network error: " << e.what() << "\n";
        return network;
    } catch (const IntegrationError& e) {
        err << "integration error at t = " << e.time() << " s: " << e.what() << "\n";
        return unstable;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return infeasible;
    } catch (const InstabilityError& e) {
        err << "unstable: " << e.what() << "\n";
        return unstable;
    } catch (const InsufficientDataError& e) {
        err << "insufficient data: " << e.what() << "\n";
        return bad_data;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return bad_data;
    }
    return bad_data;
}

}  // namespace hydroloop::cli
