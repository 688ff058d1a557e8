#pragma once

#include <optional>
#include <vector>

#include "hydroloop/lti.hpp"

// PID synthesis under the sensitivity-circle constraint
// |1 + C(iw) P(iw)| >= 1/M_s for all w.
namespace hydroloop::synthesis {

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;

    void validate() const;
    // kp + ki/s + kd s (improper; used only in frequency-domain work).
    lti::TransferFunction tf() const;
    lti::Complex at(double omega) const;
};

struct GainBox {
    double kp_lo = 0.0, kp_hi = 100.0;
    double ki_lo = 0.0, ki_hi = 500.0;
    double kd_lo = 0.0, kd_hi = 5.0;

    bool contains(const PidGains& g) const noexcept;
};

struct RobustSpec {
    double M_s = 1.1;
    lti::FrequencyGrid grid = lti::FrequencyGrid::default_grid();
    GainBox box{};

    double r() const noexcept { return 1.0 / M_s; }
    double r2() const noexcept { return 1.0 / (M_s * M_s); }
    void validate() const;
};

// |1 + [kp + i(kd w - ki/w)] P(iw)|^2
double constraint_f(const PidGains& g, double omega, const lti::TransferFunction& plant);
// d f / d w, analytic.
double constraint_df(const PidGains& g, double omega, const lti::TransferFunction& plant);

struct ConstraintPoint {
    double omega;
    double f;
};

// Grid minimum of f polished by golden-section search in log w between the
// neighbours of every grid local minimum close to the lowest one.
ConstraintPoint min_constraint(const PidGains& g, const lti::TransferFunction& plant, const lti::FrequencyGrid& grid);

// All grid local minima of f, each polished, in ascending frequency.
std::vector<ConstraintPoint> constraint_local_minima(const PidGains& g, const lti::TransferFunction& plant,
                                                     const lti::FrequencyGrid& grid);

struct Feasibility {
    bool feasible;
    PidGains gains;
    double min_f;  // best refined min_w f found for this ki
};

// Search (kp, kd) in the box maximising min_w f at fixed ki.
Feasibility find_feasible(const lti::TransferFunction& plant, const RobustSpec& spec, double ki,
                          std::optional<PidGains> warm_start = std::nullopt);

// Largest ki whose constraint can be met, with the tangency polish applied.
// Throws InfeasibleError when no positive ki is feasible in the box.
PidGains maximize_ki(const lti::TransferFunction& plant, const RobustSpec& spec);

struct TangencyReport {
    std::vector<ConstraintPoint> points;  // |f - r^2| <= 1% r^2
    double min_f;
    double min_omega;
    double achieved_M_s;  // 1 / sqrt(min_f)
    double critical_omega;
};

// Dense-grid constraint survey and Nyquist winding test of C P. Throws
// InstabilityError when the locus encircles -1.
TangencyReport verify_design(const PidGains& g, const lti::TransferFunction& plant, const RobustSpec& spec);

}  // namespace hydroloop::synthesis
