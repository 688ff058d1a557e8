#pragma once

#include "hydroloop/lti.hpp"

// Reduced-order hydraulic valve-cylinder drive: orifice law, linearization,
// nominal process model, friction and valve nonlinearities, and the
// nonlinear ODE used as the simulated truth plant.
namespace hydroloop::plant {

struct PlantParams {
    double m;          // total moving mass [kg]
    double sigma_lin;  // linear viscous coefficient [N s/m]
    double V_t;        // total oil volume [m^3]
    double E;          // bulk modulus [Pa]
    double A_bar;      // mean piston area [m^2]
    double K;          // valve flow coefficient [m^3/s/sqrt(Pa)] per unit spool
    double P_S;        // supply pressure [Pa]

    void validate() const;
};

struct ValveNonlinearity {
    double deadzone = 0.05;  // half-width d in [0, 1); saturation fixed at |z| <= 1

    void validate() const;
};

struct StribeckParams {
    double F_c;      // Coulomb force [N]
    double F_s;      // static force [N]
    double v_s;      // Stribeck velocity [m/s]
    double delta;    // shape exponent
    double sigma_v;  // viscous coefficient [N s/m]

    void validate() const;
};

struct PlantState {
    double x = 0.0;       // rod position [m]
    double v = 0.0;       // rod velocity [m/s]
    double p_load = 0.0;  // load pressure [Pa]
};

struct LinearizationGains {
    double C_q;   // flow gain dQ/dz
    double C_qp;  // flow-pressure coefficient -dQ/dP_L
};

// sign with sign(0) = 0
constexpr double sgn(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Q_L = z K sqrt((P_S - sign(z) P_L) / 2). Requires |z| <= 1 and a positive
// square-root argument whenever z != 0 (otherwise CavitationError).
double orifice_flow(double z, double p_load, const PlantParams& p);

// Operating-point gains of the orifice law. Requires |z_hat| <= 1 and
// |P_L_hat| <= 0.95 P_S.
LinearizationGains linearize(double z_hat, double p_load_hat, const PlantParams& p);

// Nominal process x/z: e^{-s tau} k / (s (a2 s^2 + a1 s + 1)) with the
// coefficients written directly in the physical parameters. Returned in
// monic form: num = {k wn^2}, den = {0, wn^2, 2 xi wn, 1}.
lti::TransferFunction nominal_tf(const PlantParams& p, const LinearizationGains& g, double tau);

// sign(v) [F_c + (F_s - F_c) exp(-|v/v_s|^delta)] + sigma_v v
double stribeck_force(double v, const StribeckParams& fp);

// Least-squares slope through the origin of the friction curve on [0, v_max]
// (composite Simpson, 1001 nodes).
double fit_sigma_lin(const StribeckParams& fp, double v_max);

// Dead-zone then saturation of the commanded spool.
double apply_valve(double u, const ValveNonlinearity& vn);

enum class FrictionKind { stribeck, linear };
enum class FlowKind { orifice, linearized };

struct IntegrationConfig {
    double stiction_velocity = 1e-5;  // [m/s]
    double pressure_clamp = 0.98;     // fraction of P_S
};

/// Everything needed to advance the truth plant. The default is the
/// nonlinear model; `linearized()` swaps in the linear model
/// (linear viscous friction, linearized flow, no dead-zone).
struct TruthPlant {
    PlantParams params;
    ValveNonlinearity valve;
    StribeckParams friction;
    IntegrationConfig integration;
    FrictionKind friction_kind = FrictionKind::stribeck;
    FlowKind flow_kind = FlowKind::orifice;
    LinearizationGains gains{0.0, 0.0};  // used with FlowKind::linearized

    static TruthPlant linearized(const PlantParams& p, const LinearizationGains& g);
};

struct Derivative {
    double dx;
    double dv;
    double dp;
};

// Right-hand side of the reduced-order model for an effective spool z.
Derivative plant_rhs(const PlantState& s, double z, const TruthPlant& plant);

// One RK4 step with the spool command held over dt. Throws IntegrationError
// when the state becomes non-finite; `time` only labels that error.
PlantState plant_step(const PlantState& state, double u, double dt, const TruthPlant& plant,
                      double time = 0.0);
PlantState plant_step(const PlantState& state, double u, double dt, const PlantParams& p,
                      const ValveNonlinearity& vn, const StribeckParams& fp);

}  // namespace hydroloop::plant
