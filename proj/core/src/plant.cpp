#include "hydroloop/plant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hydroloop/error.hpp"
#include "hydroloop/numeric.hpp"

namespace hydroloop::plant {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << name << " must be finite and > 0 (got " << v << ")";
        throw ValidationError(msg.str());
    }
}

constexpr double kDomainSlack = 1e-12;

}  // namespace

void PlantParams::validate() const {
    require_positive(m, "plant.m");
    require_positive(sigma_lin, "plant.sigma_lin");
    require_positive(V_t, "plant.V_t");
    require_positive(E, "plant.E");
    require_positive(A_bar, "plant.A_bar");
    require_positive(K, "plant.K");
    require_positive(P_S, "plant.P_S");
}

void ValveNonlinearity::validate() const {
    if (!(deadzone >= 0.0 && deadzone < 1.0)) throw ValidationError("valve.deadzone must lie in [0, 1)");
}

void StribeckParams::validate() const {
    require_positive(F_c, "friction.F_c");
    require_positive(v_s, "friction.v_s");
    require_positive(delta, "friction.delta");
    if (!(F_s >= F_c)) throw ValidationError("friction.F_s must be >= friction.F_c");
    if (!(sigma_v >= 0.0)) throw ValidationError("friction.sigma_v must be >= 0");
}

double orifice_flow(double z, double p_load, const PlantParams& p) {
    if (std::abs(z) > 1.0 + kDomainSlack) throw ValidationError("orifice_flow: |z| must be <= 1");
    if (z == 0.0) return 0.0;
    const double arg = 0.5 * (p.P_S - sgn(z) * p_load);
    if (!(arg > 0.0)) {
        std::ostringstream msg;
        msg << "orifice_flow: square-root argument <= 0 at z = " << z << ", P_L = " << p_load;
        throw CavitationError(msg.str());
    }
    return z * p.K * std::sqrt(arg);
}

LinearizationGains linearize(double z_hat, double p_load_hat, const PlantParams& p) {
    if (std::abs(z_hat) > 1.0 + kDomainSlack) throw ValidationError("linearize: |z_hat| must be <= 1");
    if (std::abs(p_load_hat) > 0.95 * p.P_S * (1.0 + kDomainSlack))
        throw ValidationError("linearize: |P_L_hat| must be <= 0.95 P_S");
    const double root = std::sqrt(0.5 * (p.P_S - sgn(z_hat) * p_load_hat));
    return {p.K * root, std::abs(z_hat) * p.K / (4.0 * root)};
}

lti::TransferFunction nominal_tf(const PlantParams& p, const LinearizationGains& g, double tau) {
    const double q = p.sigma_lin * g.C_qp + p.A_bar * p.A_bar;
    const double a2 = p.m * p.V_t / (4.0 * p.E * q);
    const double a1 = (g.C_qp * p.m + p.sigma_lin * p.V_t / (4.0 * p.E)) / q;
    const double k = g.C_q * p.A_bar / q;
    return lti::TransferFunction({k / a2}, {0.0, 1.0 / a2, a1 / a2, 1.0}, tau);
}

double stribeck_force(double v, const StribeckParams& fp) {
    const double s = sgn(v);
    const double decay = std::exp(-std::pow(std::abs(v / fp.v_s), fp.delta));
    return s * (fp.F_c + (fp.F_s - fp.F_c) * decay) + fp.sigma_v * v;
}

double fit_sigma_lin(const StribeckParams& fp, double v_max) {
    if (!(v_max > 0.0)) throw ValidationError("fit_sigma_lin: v_max must be > 0");
    constexpr std::size_t n = 1001;
    const auto w = numeric::simpson_weights(n, 0.0, v_max);
    const auto v = numeric::linspace(0.0, v_max, n);
    double fv = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fv += w[i] * stribeck_force(v[i], fp) * v[i];
        vv += w[i] * v[i] * v[i];
    }
    return fv / vv;
}

double apply_valve(double u, const ValveNonlinearity& vn) {
    const double a = std::abs(u);
    if (a <= vn.deadzone) return 0.0;
    if (a > 1.0) return sgn(u);
    return sgn(u) * (a - vn.deadzone) / (1.0 - vn.deadzone);
}

TruthPlant TruthPlant::linearized(const PlantParams& p, const LinearizationGains& g) {
    TruthPlant t;
    t.params = p;
    t.valve.deadzone = 0.0;
    t.friction = {1.0, 1.0, 1.0, 1.0, p.sigma_lin};
    t.friction_kind = FrictionKind::linear;
    t.flow_kind = FlowKind::linearized;
    t.gains = g;
    return t;
}

Derivative plant_rhs(const PlantState& s, double z, const TruthPlant& plant) {
    const auto& p = plant.params;
    const double friction = plant.friction_kind == FrictionKind::stribeck ? stribeck_force(s.v, plant.friction)
                                                                          : p.sigma_lin * s.v;
    double q = 0.0;
    if (plant.flow_kind == FlowKind::orifice) {
        // the clamp keeps RK4 stages out of the cavitation domain
        const double arg = std::max(0.0, 0.5 * (p.P_S - sgn(z) * s.p_load));
        q = z * p.K * std::sqrt(arg);
    } else {
        q = plant.gains.C_q * z - plant.gains.C_qp * s.p_load;
    }
    return {s.v, (p.A_bar * s.p_load - friction) / p.m, 4.0 * p.E / p.V_t * (q - p.A_bar * s.v)};
}

PlantState plant_step(const PlantState& state, double u, double dt, const TruthPlant& plant, double time) {
    if (!(dt > 0.0)) throw ValidationError("plant_step: dt must be > 0");
    const double z = apply_valve(u, plant.valve);

    const bool stribeck = plant.friction_kind == FrictionKind::stribeck;
    const bool stuck = stribeck && state.v == 0.0 &&
                       std::abs(plant.params.A_bar * state.p_load) <= plant.friction.F_s;
    if (stuck) {
        // rod held by static friction: only the chamber pressure evolves
        auto dp = [&](double p) { return plant_rhs({state.x, 0.0, p}, z, plant).dp; };
        const double q1 = dp(state.p_load);
        const double q2 = dp(state.p_load + 0.5 * dt * q1);
        const double q3 = dp(state.p_load + 0.5 * dt * q2);
        const double q4 = dp(state.p_load + dt * q3);
        PlantState next{state.x, 0.0, state.p_load + dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4)};
        if (!std::isfinite(next.p_load)) {
            std::ostringstream msg;
            msg << "plant integration produced a non-finite state at t = " << time + dt << " s";
            throw IntegrationError(msg.str(), time + dt);
        }
        const double p_max = plant.integration.pressure_clamp * plant.params.P_S;
        next.p_load = std::clamp(next.p_load, -p_max, p_max);
        return next;
    }

    auto add = [](const PlantState& s, const Derivative& d, double h) {
        return PlantState{s.x + h * d.dx, s.v + h * d.dv, s.p_load + h * d.dp};
    };
    const Derivative k1 = plant_rhs(state, z, plant);
    const Derivative k2 = plant_rhs(add(state, k1, 0.5 * dt), z, plant);
    const Derivative k3 = plant_rhs(add(state, k2, 0.5 * dt), z, plant);
    const Derivative k4 = plant_rhs(add(state, k3, dt), z, plant);
    PlantState next{
        state.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
        state.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv),
        state.p_load + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp),
    };

    if (!std::isfinite(next.x) || !std::isfinite(next.v) || !std::isfinite(next.p_load)) {
        std::ostringstream msg;
        msg << "plant integration produced a non-finite state at t = " << time + dt << " s";
        throw IntegrationError(msg.str(), time + dt);
    }

    const double p_max = plant.integration.pressure_clamp * plant.params.P_S;
    next.p_load = std::clamp(next.p_load, -p_max, p_max);

    if (stribeck) {
        const bool holds = std::abs(plant.params.A_bar * next.p_load) <= plant.friction.F_s;
        const bool reversed = sgn(state.v) * sgn(next.v) < 0.0;
        const bool slow = std::abs(next.v) < plant.integration.stiction_velocity;
        if (holds && (slow || reversed)) next.v = 0.0;
    }
    return next;
}

PlantState plant_step(const PlantState& state, double u, double dt, const PlantParams& p,
                      const ValveNonlinearity& vn, const StribeckParams& fp) {
    TruthPlant t;
    t.params = p;
    t.valve = vn;
    t.friction = fp;
    return plant_step(state, u, dt, t);
}

}  // namespace hydroloop::plant
