#include "hydroloop/twodof.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hydroloop/error.hpp"
#include "hydroloop/plant.hpp"

namespace hydroloop::twodof {

using lti::Complex;

void TwoDofConfig::validate() const {
    if (!std::isfinite(gains.kp) || !std::isfinite(gains.ki) || !std::isfinite(gains.kd))
        throw ValidationError("controller gains must be finite");
    if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("controller: b must lie in [0, 1]");
    if (!(N > 0.0)) throw ValidationError("controller: N must be > 0");
    if (!(omega_o > 0.0) || !std::isfinite(omega_o)) throw ValidationError("controller: omega_o must be > 0");
    if (!(Ts > 0.0)) throw ValidationError("controller: Ts must be > 0");
    if (!(deadzone >= 0.0 && deadzone < 1.0)) throw ValidationError("controller: deadzone must lie in [0, 1)");
}

void SetpointFilter::validate() const {
    if (!(tau_sp >= 0.0) || !std::isfinite(tau_sp)) throw ValidationError("set-point filter: tau_sp must be >= 0");
}

lti::TransferFunction build_ff(const TwoDofConfig& cfg) {
    return lti::TransferFunction({cfg.gains.ki, cfg.b * cfg.gains.kp}, {0.0, 1.0});
}

lti::TransferFunction build_fn(const TwoDofConfig& cfg) {
    const double a = 2.0 * cfg.N * cfg.omega_o;
    return lti::TransferFunction({1.0}, {1.0, 2.0 / a, 1.0 / (a * a)});
}

lti::TransferFunction build_sp(const SetpointFilter& sp) {
    if (sp.tau_sp <= 0.0) return lti::TransferFunction::gain(1.0);
    return lti::TransferFunction({1.0}, {1.0, sp.tau_sp});
}

double gain_crossover(const synthesis::PidGains& g, const lti::TransferFunction& plant,
                      const lti::FrequencyGrid& grid) {
    auto excess = [&](double w) { return std::log(std::abs(g.at(w) * plant.at(w))); };
    double prev = excess(grid[0]);
    if (prev < 0.0) throw ValidationError("gain_crossover: |L| < 1 already at the lowest grid frequency");
    for (std::size_t j = 1; j < grid.size(); ++j) {
        const double cur = excess(grid[j]);
        if (cur < 0.0) {
            double lo = std::log(grid[j - 1]);
            double hi = std::log(grid[j]);
            for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
                const double mid = 0.5 * (lo + hi);
                (excess(std::exp(mid)) >= 0.0 ? lo : hi) = mid;
            }
            return std::exp(0.5 * (lo + hi));
        }
        prev = cur;
    }
    throw ValidationError("gain_crossover: |L| never drops below 1 on the grid");
}

lti::FrequencyFunction closed_loop_W(const TwoDofConfig& cfg, const lti::TransferFunction& plant,
                                     const lti::FrequencyGrid& grid) {
    cfg.validate();
    const auto ff = build_ff(cfg);
    const auto fn = build_fn(cfg);
    const auto g = cfg.gains;
    auto loop = [g, fn, plant](double w) { return g.at(w) * fn.at(w) * plant.at(w); };
    const auto nyq = lti::nyquist_check(loop, 1 + plant.origin_poles(), grid.front(), grid.back());
    if (nyq.unstable_poles != 0) {
        std::ostringstream msg;
        msg << "loop with the noise filter is unstable (" << nyq.unstable_poles
            << " closed-loop pole(s) in the right half-plane near " << nyq.critical_omega
            << " rad/s); re-verify the synthesis with F_n in the loop";
        throw InstabilityError(msg.str(), nyq.critical_omega);
    }
    return [ff, plant, loop](double w) { return ff.at(w) * plant.at(w) / (1.0 + loop(w)); };
}

SetpointFilter design_sp_filter(const TwoDofConfig& cfg, const lti::TransferFunction& plant,
                                const lti::FrequencyGrid& grid) {
    const auto W = closed_loop_W(cfg, plant, grid);
    const auto peak = lti::hinf_norm(grid, [&](double w) { return std::abs(W(w)); });

    SetpointFilter sp;
    sp.M_w = peak.peak;
    sp.omega_sp = peak.omega;
    if (peak.peak <= 1.0) {
        sp.filtered_peak = peak.peak;
        return sp;
    }
    const double tau0 = 2.0 * std::numbers::pi / peak.omega * std::sqrt(peak.peak * peak.peak - 1.0);
    auto filtered = [&](double tau) {
        return lti::hinf_norm(grid, [&](double w) { return std::abs(W(w) / Complex{1.0, w * tau}); }).peak;
    };
    constexpr double limit = 1.005;
    double tau = tau0;
    double fp = filtered(tau);
    if (fp > limit) {
        double lo = 1.0;
        double hi = 2.0;
        while (filtered(tau0 * hi) > limit) {
            lo = hi;
            hi *= 2.0;
            ++sp.inflation_steps;
            if (hi > 1e6) throw ValidationError("design_sp_filter: cannot bring max |F_sp W| below 1.005");
        }
        while (hi - lo > 1e-3 * lo) {
            const double mid = 0.5 * (lo + hi);
            (filtered(tau0 * mid) > limit ? lo : hi) = mid;
            ++sp.inflation_steps;
        }
        tau = tau0 * hi;
        fp = filtered(tau);
    }
    sp.tau_sp = tau;
    sp.filtered_peak = fp;
    return sp;
}

double inverse_deadzone(double u, double d) {
    if (u == 0.0) return 0.0;
    const double v = plant::sgn(u) * (d + std::abs(u) * (1.0 - d));
    return std::clamp(v, -1.0, 1.0);
}

namespace {

lti::DiscreteFilter fn_section(const TwoDofConfig& cfg) {
    cfg.validate();
    const double a = 2.0 * cfg.N * cfg.omega_o;
    return lti::tustin_discretize(lti::TransferFunction({1.0}, {1.0, 1.0 / a}), cfg.Ts);
}

}  // namespace

Controller::Controller(const TwoDofConfig& cfg, const SetpointFilter& sp)
    : cfg_(cfg),
      sp_(sp),
      sp_pole_(0.0),
      fn1_(fn_section(cfg)),
      fn2_(fn_section(cfg)) {
    sp_.validate();
    sp_pole_ = sp_.tau_sp > 0.0 ? std::exp(-cfg_.Ts / sp_.tau_sp) : 0.0;
}

void Controller::reset() {
    fn1_.reset();
    fn2_.reset();
    primed_ = false;
    faulted_ = false;
    ref_f_ = 0.0;
    integral_ = 0.0;
    prev_error_ = 0.0;
    prev_y_f_ = 0.0;
}

double Controller::step(double x_ref, double y) {
    if (!std::isfinite(x_ref) || !std::isfinite(y)) {
        faulted_ = true;
        return 0.0;
    }
    const auto& g = cfg_.gains;
    if (!primed_) {
        fn1_.prime(y);
        fn2_.prime(y);
        ref_f_ = x_ref;
        prev_y_f_ = y;
        prev_error_ = x_ref - y;
        // the integrator state that holds u = 0 at rest with x_ref = y
        integral_ = g.kp * (1.0 - cfg_.b) * y;
        primed_ = true;
    }
    ref_f_ = sp_pole_ * ref_f_ + (1.0 - sp_pole_) * x_ref;
    const double y_f = fn2_.step(fn1_.step(y));

    const double e = ref_f_ - y_f;
    const double proportional = g.kp * (cfg_.b * ref_f_ - y_f);
    const double derivative = g.kd * (prev_y_f_ - y_f) / cfg_.Ts;
    const double held = integral_;
    integral_ += 0.5 * g.ki * cfg_.Ts * (e + prev_error_);
    double u = proportional + integral_ + derivative;
    if (cfg_.anti_windup && std::abs(u) > 1.0 && plant::sgn(e) == plant::sgn(u)) {
        integral_ = held;
        u = proportional + integral_ + derivative;
    }
    prev_error_ = e;
    prev_y_f_ = y_f;
    return std::clamp(u, -1.0, 1.0);
}

}  // namespace hydroloop::twodof
