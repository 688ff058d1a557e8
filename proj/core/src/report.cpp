#include "hydroloop/report.hpp"

#include <cmath>
#include <sstream>

#include "hydroloop/error.hpp"
#include "json_access.hpp"

namespace hydroloop {

using detail::require;
using detail::require_number;
using nlohmann::json;

namespace {

std::vector<double> number_array(const json& j, const std::string& path, const std::string& key) {
    const auto& a = require(j, path, key);
    if (!a.is_array()) throw ValidationError("key " + path + "." + key + " must be an array");
    std::vector<double> out;
    for (const auto& v : a) {
        if (!v.is_number()) throw ValidationError("key " + path + "." + key + " must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

bool require_bool(const json& j, const std::string& path, const std::string& key) {
    const auto& v = require(j, path, key);
    if (!v.is_boolean()) throw ValidationError("key " + path + "." + key + " must be true or false");
    return v.get<bool>();
}

json point_json(const uncertainty::OperatingPoint& p) { return {{"z", p.z}, {"p_load", p.p_load}}; }

uncertainty::OperatingPoint point_from(const json& j, const std::string& path) {
    return {require_number(j, path, "z"), require_number(j, path, "p_load")};
}

json gains_json(const synthesis::PidGains& g) { return {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}}; }

synthesis::PidGains gains_from(const json& j, const std::string& path) {
    return {require_number(j, path, "kp"), require_number(j, path, "ki"), require_number(j, path, "kd")};
}

json gamma_json(const uncertainty::GammaFit& g) {
    return {{"shape", g.shape},     {"scale", g.scale},     {"quantum", g.quantum},
            {"tau_min", g.tau_min}, {"tau_max", g.tau_max}, {"tau_nom", g.tau_nom()}};
}

}  // namespace

std::string DesignReport::consistency_error() const {
    if (!linearization) return {};
    const auto expected = plant::nominal_tf(calibration.plant, linearization->nominal, linearization->delay);
    const auto stored = linearization->plant();
    auto differs = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return true;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(a[i] - b[i]) > 1e-9 * std::max(std::abs(a[i]), std::abs(b[i]))) return true;
        return false;
    };
    if (differs(expected.numerator(), stored.numerator()) || differs(expected.denominator(), stored.denominator()))
        return "stored P_nom does not match calibration and nominal gains";
    return {};
}

json to_json(const DesignReport& r) {
    json j;
    j["calibration"] = to_json(r.calibration);
    if (r.linearization) {
        const auto& l = *r.linearization;
        j["linearization"] = {
            {"C_q_nom", l.nominal.C_q},
            {"C_qp_nom", l.nominal.C_qp},
            {"k", l.poles.k},
            {"omega_n", l.poles.omega_n},
            {"xi", l.poles.xi},
            {"P_nom", {{"numerator", l.numerator}, {"denominator", l.denominator}, {"delay", l.delay}}},
            {"deviation",
             {{"k", l.deviation.k},
              {"omega_n", l.deviation.omega_n},
              {"xi", l.deviation.xi},
              {"k_at", point_json(l.deviation.k_at)},
              {"omega_n_at", point_json(l.deviation.omega_n_at)},
              {"xi_at", point_json(l.deviation.xi_at)}}},
        };
    }
    if (r.rtt) j["rtt"] = gamma_json(*r.rtt);
    if (r.synthesis) {
        const auto& s = *r.synthesis;
        json tang = json::array();
        for (const auto& p : s.tangencies) tang.push_back({{"omega", p.omega}, {"f", p.f}});
        j["synthesis"] = {{"M_s", s.M_s},
                          {"gains", gains_json(s.gains)},
                          {"min_f", s.min_f},
                          {"min_omega", s.min_omega},
                          {"achieved_M_s", s.achieved_M_s},
                          {"tangencies", tang}};
    }
    if (r.robust) {
        const auto& b = *r.robust;
        j["robust"] = {{"k_ratio_max", b.k_ratio_max},
                       {"tau_max", b.tau_max},
                       {"weight",
                        {{"k_w", b.weight.k_w},
                         {"omega_z", b.weight.omega_z},
                         {"xi_z", b.weight.xi_z},
                         {"omega_p", b.weight.omega_p},
                         {"xi_p", b.weight.xi_p}}},
                       {"margin", b.margin},
                       {"margin_omega", b.margin_omega},
                       {"robust", b.robust}};
    }
    if (r.controller) {
        const auto& c = r.controller->config;
        const auto& sp = r.controller->setpoint;
        j["controller"] = {{"gains", gains_json(c.gains)},
                           {"b", c.b},
                           {"N", c.N},
                           {"omega_o", c.omega_o},
                           {"Ts", c.Ts},
                           {"deadzone", c.deadzone},
                           {"anti_windup", c.anti_windup},
                           {"setpoint_filter",
                            {{"tau_sp", sp.tau_sp},
                             {"M_w", sp.M_w},
                             {"omega_sp", sp.omega_sp},
                             {"filtered_peak", sp.filtered_peak},
                             {"inflation_steps", sp.inflation_steps}}}};
    }
    return j;
}

DesignReport report_from_json(const json& j) {
    DesignReport r;
    r.calibration = calibration_from_json(require(j, "", "calibration"));
    if (const auto it = j.find("linearization"); it != j.end()) {
        const auto& l = *it;
        LinearizationSection s;
        s.nominal = {require_number(l, "linearization", "C_q_nom"), require_number(l, "linearization", "C_qp_nom")};
        s.poles = {require_number(l, "linearization", "k"), require_number(l, "linearization", "omega_n"),
                   require_number(l, "linearization", "xi")};
        const auto& p = require(l, "linearization", "P_nom");
        s.numerator = number_array(p, "linearization.P_nom", "numerator");
        s.denominator = number_array(p, "linearization.P_nom", "denominator");
        s.delay = require_number(p, "linearization.P_nom", "delay");
        const auto& d = require(l, "linearization", "deviation");
        const std::string dp = "linearization.deviation";
        s.deviation.k = require_number(d, dp, "k");
        s.deviation.omega_n = require_number(d, dp, "omega_n");
        s.deviation.xi = require_number(d, dp, "xi");
        s.deviation.k_at = point_from(require(d, dp, "k_at"), dp + ".k_at");
        s.deviation.omega_n_at = point_from(require(d, dp, "omega_n_at"), dp + ".omega_n_at");
        s.deviation.xi_at = point_from(require(d, dp, "xi_at"), dp + ".xi_at");
        s.plant();  // validates the coefficients
        r.linearization = s;
    }
    if (const auto it = j.find("rtt"); it != j.end()) {
        uncertainty::GammaFit g;
        g.shape = require_number(*it, "rtt", "shape");
        g.scale = require_number(*it, "rtt", "scale");
        g.quantum = require_number(*it, "rtt", "quantum");
        g.tau_min = require_number(*it, "rtt", "tau_min");
        g.tau_max = require_number(*it, "rtt", "tau_max");
        g.validate();
        r.rtt = g;
    }
    if (const auto it = j.find("synthesis"); it != j.end()) {
        SynthesisSection s;
        s.M_s = require_number(*it, "synthesis", "M_s");
        s.gains = gains_from(require(*it, "synthesis", "gains"), "synthesis.gains");
        s.min_f = require_number(*it, "synthesis", "min_f");
        s.min_omega = require_number(*it, "synthesis", "min_omega");
        s.achieved_M_s = require_number(*it, "synthesis", "achieved_M_s");
        const auto& t = require(*it, "synthesis", "tangencies");
        if (!t.is_array()) throw ValidationError("key synthesis.tangencies must be an array");
        for (const auto& p : t)
            s.tangencies.push_back({require_number(p, "synthesis.tangencies", "omega"),
                                    require_number(p, "synthesis.tangencies", "f")});
        r.synthesis = s;
    }
    if (const auto it = j.find("robust"); it != j.end()) {
        RobustSection b;
        b.k_ratio_max = require_number(*it, "robust", "k_ratio_max");
        b.tau_max = require_number(*it, "robust", "tau_max");
        const auto& w = require(*it, "robust", "weight");
        b.weight = {require_number(w, "robust.weight", "k_w"), require_number(w, "robust.weight", "omega_z"),
                    require_number(w, "robust.weight", "xi_z"), require_number(w, "robust.weight", "omega_p"),
                    require_number(w, "robust.weight", "xi_p")};
        b.margin = require_number(*it, "robust", "margin");
        b.margin_omega = require_number(*it, "robust", "margin_omega");
        b.robust = require_bool(*it, "robust", "robust");
        r.robust = b;
    }
    if (const auto it = j.find("controller"); it != j.end()) {
        ControllerSection c;
        c.config.gains = gains_from(require(*it, "controller", "gains"), "controller.gains");
        c.config.b = require_number(*it, "controller", "b");
        c.config.N = require_number(*it, "controller", "N");
        c.config.omega_o = require_number(*it, "controller", "omega_o");
        c.config.Ts = require_number(*it, "controller", "Ts");
        c.config.deadzone = require_number(*it, "controller", "deadzone");
        c.config.anti_windup = require_bool(*it, "controller", "anti_windup");
        const auto& sp = require(*it, "controller", "setpoint_filter");
        const std::string sp_path = "controller.setpoint_filter";
        c.setpoint.tau_sp = require_number(sp, sp_path, "tau_sp");
        c.setpoint.M_w = require_number(sp, sp_path, "M_w");
        c.setpoint.omega_sp = require_number(sp, sp_path, "omega_sp");
        c.setpoint.filtered_peak = require_number(sp, sp_path, "filtered_peak");
        c.setpoint.inflation_steps = static_cast<int>(require_number(sp, sp_path, "inflation_steps"));
        c.config.validate();
        c.setpoint.validate();
        r.controller = c;
    }
    return r;
}

DesignReport load_report(const std::filesystem::path& path) { return report_from_json(detail::read_json_file(path)); }

std::string dump_report(const DesignReport& r) { return detail::dump_json(to_json(r)); }

void save_report(const DesignReport& r, const std::filesystem::path& path) {
    detail::write_text_file(path, dump_report(r));
}

}  // namespace hydroloop
