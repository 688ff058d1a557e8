#pragma once

#include "hydroloop/lti.hpp"
#include "hydroloop/synthesis.hpp"

// Two-degrees-of-freedom runtime: set-point weighting, measurement noise
// filter, set-point pre-filter, dead-zone compensation and the sampled
// controller that executes them.
namespace hydroloop::twodof {

struct TwoDofConfig {
    synthesis::PidGains gains{};
    double b = 0.5;          // set-point weight
    double N = 5.0;          // noise-filter corner at 2 N omega_o
    double omega_o = 1.0;    // [rad/s]
    double Ts = 0.01;        // controller period [s]
    double deadzone = 0.05;  // valve dead-zone half-width compensated by D(u)
    bool anti_windup = true;

    void validate() const;
};

struct SetpointFilter {
    double tau_sp = 0.0;  // [s]; 0 disables the filter
    double M_w = 1.0;     // peak |W| before filtering
    double omega_sp = 0.0;
    double filtered_peak = 1.0;  // peak |F_sp W| after sizing
    int inflation_steps = 0;

    void validate() const;
};

// b kp + ki / s
lti::TransferFunction build_ff(const TwoDofConfig& cfg);
// 1 / (1 + s / (2 N omega_o))^2
lti::TransferFunction build_fn(const TwoDofConfig& cfg);
// 1 / (tau_sp s + 1), or unity when disabled
lti::TransferFunction build_sp(const SetpointFilter& sp);

// Lowest frequency at which |C(iw) P(iw)| falls through 1.
double gain_crossover(const synthesis::PidGains& g, const lti::TransferFunction& plant,
                      const lti::FrequencyGrid& grid);

// W = G_ff P / (1 + C F_n P). The loop with F_n is re-checked by the winding
// test; InstabilityError if it fails.
lti::FrequencyFunction closed_loop_W(const TwoDofConfig& cfg, const lti::TransferFunction& plant,
                                     const lti::FrequencyGrid& grid);

// tau_sp = (2 pi / omega_sp) sqrt(M_w^2 - 1) at the peak of |W|, inflated if
// the filtered peak still exceeds 1.005.
SetpointFilter design_sp_filter(const TwoDofConfig& cfg, const lti::TransferFunction& plant,
                                const lti::FrequencyGrid& grid);

// sign(u) (d + |u| (1 - d)), saturated to [-1, 1]; D(0) = 0.
double inverse_deadzone(double u, double d);

/// Sampled 2DOF controller. Call step() once per period Ts.
class Controller {
public:
    Controller(const TwoDofConfig& cfg, const SetpointFilter& sp);

    // Returns u in [-1, 1] (before dead-zone compensation).
    double step(double x_ref, double y);
    void reset();

    const TwoDofConfig& config() const noexcept { return cfg_; }
    const SetpointFilter& setpoint_filter() const noexcept { return sp_; }
    double integrator() const noexcept { return integral_; }
    double filtered_reference() const noexcept { return ref_f_; }
    bool faulted() const noexcept { return faulted_; }

private:
    TwoDofConfig cfg_;
    SetpointFilter sp_;
    double sp_pole_;
    lti::DiscreteFilter fn1_;
    lti::DiscreteFilter fn2_;

    bool primed_ = false;
    bool faulted_ = false;
    double ref_f_ = 0.0;
    double integral_ = 0.0;
    double prev_error_ = 0.0;
    double prev_y_f_ = 0.0;
};

}  // namespace hydroloop::twodof
