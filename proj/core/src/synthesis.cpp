#include "hydroloop/synthesis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "hydroloop/error.hpp"
#include "hydroloop/numeric.hpp"

namespace hydroloop::synthesis {

using lti::Complex;

void PidGains::validate() const {
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd))
        throw ValidationError("PID gains must be finite");
    if (!(ki > 0.0)) throw ValidationError("PID gains: ki must be > 0");
}

lti::TransferFunction PidGains::tf() const { return lti::TransferFunction({ki, kp, kd}, {0.0, 1.0}); }

Complex PidGains::at(double omega) const { return {kp, kd * omega - ki / omega}; }

bool GainBox::contains(const PidGains& g) const noexcept {
    return g.kp >= kp_lo && g.kp <= kp_hi && g.ki >= ki_lo && g.ki <= ki_hi && g.kd >= kd_lo && g.kd <= kd_hi;
}

void RobustSpec::validate() const {
    if (!(M_s > 1.0) || !std::isfinite(M_s)) throw ValidationError("robust spec: M_s must be > 1");
    if (!(box.kp_lo <= box.kp_hi && box.ki_lo <= box.ki_hi && box.kd_lo <= box.kd_hi))
        throw ValidationError("robust spec: empty gain box");
    if (!(box.ki_hi > 0.0)) throw ValidationError("robust spec: ki upper bound must be > 0");
}

double constraint_f(const PidGains& g, double omega, const lti::TransferFunction& plant) {
    return std::norm(1.0 + g.at(omega) * plant.at(omega));
}

double constraint_df(const PidGains& g, double omega, const lti::TransferFunction& plant) {
    const Complex s{0.0, omega};
    const Complex p = plant(s);
    const Complex dp = plant.derivative(s);
    const Complex c = g.at(omega);
    const Complex dc = g.kd - g.ki / (s * s);
    const Complex z = 1.0 + c * p;
    const Complex dz = Complex{0.0, 1.0} * (dc * p + c * dp);
    return 2.0 * std::real(std::conj(z) * dz);
}

namespace {

// Plant response cached on a grid so f can be swept cheaply for many gains.
struct CachedPlant {
    const lti::FrequencyGrid* grid;
    std::vector<Complex> p;

    CachedPlant(const lti::TransferFunction& plant, const lti::FrequencyGrid& g)
        : grid(&g), p(lti::freq_response(plant, g)) {}

    double f(const PidGains& g, std::size_t j) const {
        return std::norm(1.0 + g.at((*grid)[j]) * p[j]);
    }

    double grid_min(const PidGains& g) const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < p.size(); ++j) m = std::min(m, f(g, j));
        return m;
    }
};

ConstraintPoint polish(const PidGains& g, const lti::TransferFunction& plant, const lti::FrequencyGrid& grid,
                       std::size_t j, double fj) {
    const double lo = grid[j == 0 ? 0 : j - 1];
    const double hi = grid[std::min(j + 1, grid.size() - 1)];
    const auto m = numeric::golden_section_minimize_log([&](double w) { return constraint_f(g, w, plant); }, lo,
                                                        hi, 1e-10);
    if (m.fx < fj) return {m.x, m.fx};
    return {grid[j], fj};
}

std::vector<std::size_t> grid_local_minima(const std::vector<double>& f) {
    std::vector<std::size_t> idx;
    const std::size_t n = f.size();
    for (std::size_t j = 0; j < n; ++j) {
        const bool left = j == 0 || f[j] <= f[j - 1];
        const bool right = j + 1 == n || f[j] <= f[j + 1];
        if (left && right) idx.push_back(j);
    }
    return idx;
}

std::vector<double> sweep(const PidGains& g, const lti::TransferFunction& plant, const lti::FrequencyGrid& grid) {
    std::vector<double> f(grid.size());
    const auto p = lti::freq_response(plant, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) f[j] = std::norm(1.0 + g.at(grid[j]) * p[j]);
    return f;
}

}  // namespace

std::vector<ConstraintPoint> constraint_local_minima(const PidGains& g, const lti::TransferFunction& plant,
                                                     const lti::FrequencyGrid& grid) {
    const auto f = sweep(g, plant, grid);
    std::vector<ConstraintPoint> out;
    for (std::size_t j : grid_local_minima(f)) out.push_back(polish(g, plant, grid, j, f[j]));
    return out;
}

ConstraintPoint min_constraint(const PidGains& g, const lti::TransferFunction& plant, const lti::FrequencyGrid& grid) {
    const auto f = sweep(g, plant, grid);
    const double lowest = *std::min_element(f.begin(), f.end());
    ConstraintPoint best{grid[0], std::numeric_limits<double>::infinity()};
    for (std::size_t j : grid_local_minima(f)) {
        // a grid-coarse minimum may hide a deeper dip; polish every near contender
        if (f[j] > lowest + 0.05 * lowest + 1e-12) continue;
        const auto c = polish(g, plant, grid, j, f[j]);
        if (c.f < best.f) best = c;
    }
    return best;
}

Feasibility find_feasible(const lti::TransferFunction& plant, const RobustSpec& spec, double ki,
                          std::optional<PidGains> warm_start) {
    const CachedPlant cache(plant, spec.grid);
    const auto& box = spec.box;
    const double r2 = spec.r2();
    const double kp_span = std::max(box.kp_hi - box.kp_lo, 1e-12);
    const double kd_span = std::max(box.kd_hi - box.kd_lo, 1e-12);

    auto to_gains = [&](double u, double v) {
        return PidGains{box.kp_lo + std::clamp(u, 0.0, 1.0) * kp_span, ki,
                        box.kd_lo + std::clamp(v, 0.0, 1.0) * kd_span};
    };
    // negative worst-case constraint value; outside the unit box the point is
    // projected and the excursion penalised so the simplex drifts back
    auto objective = [&](const std::vector<double>& x) {
        const double excess = std::max(0.0, -x[0]) + std::max(0.0, x[0] - 1.0) + std::max(0.0, -x[1]) +
                              std::max(0.0, x[1] - 1.0);
        return -cache.grid_min(to_gains(x[0], x[1])) + excess;
    };

    struct Start {
        double value;
        double u;
        double v;
    };
    std::vector<Start> starts;
    constexpr int nu = 21;
    constexpr int nv = 11;
    for (int a = 0; a < nu; ++a) {
        for (int b = 0; b < nv; ++b) {
            const double u = a / double(nu - 1);
            const double v = b / double(nv - 1);
            starts.push_back({objective({u, v}), u, v});
        }
    }
    std::stable_sort(starts.begin(), starts.end(), [](const Start& x, const Start& y) { return x.value < y.value; });
    starts.resize(3);
    if (warm_start) {
        const double u = (warm_start->kp - box.kp_lo) / kp_span;
        const double v = (warm_start->kd - box.kd_lo) / kd_span;
        starts.insert(starts.begin(), Start{objective({u, v}), u, v});
    }

    numeric::NelderMeadOptions opts;
    opts.max_evaluations = 400;
    opts.target = -r2 * (1.0 + 1e-7);

    Feasibility best{false, to_gains(starts.front().u, starts.front().v), -std::numeric_limits<double>::infinity()};
    double best_obj = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        const auto r = numeric::nelder_mead(objective, {s.u, s.v}, {0.05, 0.05}, opts);
        if (r.fx < best_obj) {
            best_obj = r.fx;
            best.gains = to_gains(r.x[0], r.x[1]);
        }
        if (best_obj <= opts.target) break;
    }
    best.min_f = min_constraint(best.gains, plant, spec.grid).f;
    best.feasible = best.min_f >= r2 * (1.0 - 1e-7);
    return best;
}

namespace {

// Damped Newton on the tangency system: f(w_j) = r^2 and df/dw(w_j) = 0 at
// three active frequencies, unknowns (kp, ki, kd, w1, w2, w3).
std::optional<PidGains> tangency_polish(const lti::TransferFunction& plant, const RobustSpec& spec,
                                        const PidGains& start) {
    auto mins = constraint_local_minima(start, plant, spec.grid);
    std::stable_sort(mins.begin(), mins.end(), [](const auto& a, const auto& b) { return a.f < b.f; });
    const double r2 = spec.r2();
    if (mins.size() < 3 || mins[2].f > r2 * 1.05) return std::nullopt;

    using Vec = Eigen::Matrix<double, 6, 1>;
    Vec x;
    x << start.kp, start.ki, start.kd, std::log(mins[0].omega), std::log(mins[1].omega), std::log(mins[2].omega);

    auto residual = [&](const Vec& y) {
        const PidGains g{y[0], y[1], y[2]};
        Vec r;
        for (int j = 0; j < 3; ++j) {
            const double w = std::exp(y[3 + j]);
            // a step that leaves the grid span is rejected by the line search
            if (!(w >= spec.grid.front() && w <= spec.grid.back())) return Vec::Constant(NAN).eval();
            r[j] = constraint_f(g, w, plant) - r2;
            r[3 + j] = constraint_df(g, w, plant) * w;
        }
        return r;
    };

    Vec res = residual(x);
    for (int it = 0; it < 50 && res.norm() > 1e-14; ++it) {
        Eigen::Matrix<double, 6, 6> jac;
        for (int c = 0; c < 6; ++c) {
            const double h = 1e-7 * std::max(std::abs(x[c]), 1.0);
            Vec xp = x;
            Vec xm = x;
            xp[c] += h;
            xm[c] -= h;
            jac.col(c) = (residual(xp) - residual(xm)) / (2.0 * h);
        }
        const Vec step = jac.colPivHouseholderQr().solve(-res);
        if (!step.allFinite()) return std::nullopt;
        double t = 1.0;
        bool improved = false;
        for (int k = 0; k < 30; ++k, t *= 0.5) {
            const Vec trial = x + t * step;
            const Vec rt = residual(trial);
            if (rt.allFinite() && rt.norm() < res.norm()) {
                x = trial;
                res = rt;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (res.norm() > 1e-9) return std::nullopt;
    const PidGains g{x[0], x[1], x[2]};
    if (!spec.box.contains(g) || !(g.ki > 0.0)) return std::nullopt;
    if (min_constraint(g, plant, spec.grid).f < r2 * (1.0 - 1e-9)) return std::nullopt;
    return g;
}

}  // namespace

PidGains maximize_ki(const lti::TransferFunction& plant, const RobustSpec& spec) {
    spec.validate();
    const double hi_bound = spec.box.ki_hi;
    const double lo_bound = std::max(spec.box.ki_lo, 1e-6 * hi_bound);

    Feasibility at_lo = find_feasible(plant, spec, lo_bound);
    if (!at_lo.feasible) {
        std::ostringstream msg;
        msg << "no feasible PID in the search box at ki = " << lo_bound << " (best min f = " << at_lo.min_f
            << ", required " << spec.r2() << ")";
        throw InfeasibleError(msg.str(), spec.r2() - at_lo.min_f);
    }
    Feasibility at_hi = find_feasible(plant, spec, hi_bound, at_lo.gains);
    if (at_hi.feasible) return at_hi.gains;

    double lo = lo_bound;
    double hi = hi_bound;
    PidGains best = at_lo.gains;
    while (hi - lo > 1e-4 * std::max(lo, 1.0)) {
        const double mid = 0.5 * (lo + hi);
        const auto trial = find_feasible(plant, spec, mid, best);
        if (trial.feasible) {
            lo = mid;
            best = trial.gains;
        } else {
            hi = mid;
        }
    }
    if (auto polished = tangency_polish(plant, spec, best); polished && polished->ki > best.ki) return *polished;
    return best;
}

TangencyReport verify_design(const PidGains& g, const lti::TransferFunction& plant, const RobustSpec& spec) {
    spec.validate();
    const auto c = g.tf();
    const auto nyq = lti::nyquist_check([&](double w) { return g.at(w) * plant.at(w); },
                                        c.origin_poles() + plant.origin_poles(), spec.grid.front(),
                                        spec.grid.back());
    if (nyq.unstable_poles != 0) {
        std::ostringstream msg;
        msg << "design rejected: Nyquist locus encircles -1 (" << nyq.unstable_poles
            << " unstable closed-loop pole(s)), closest approach at " << nyq.critical_omega << " rad/s";
        throw InstabilityError(msg.str(), nyq.critical_omega);
    }

    TangencyReport rep;
    const double r2 = spec.r2();
    const auto mins = constraint_local_minima(g, plant, spec.grid);
    rep.min_f = std::numeric_limits<double>::infinity();
    rep.min_omega = spec.grid.front();
    for (const auto& m : mins) {
        if (std::abs(m.f - r2) <= 0.01 * r2) rep.points.push_back(m);
        if (m.f < rep.min_f) {
            rep.min_f = m.f;
            rep.min_omega = m.omega;
        }
    }
    rep.achieved_M_s = 1.0 / std::sqrt(rep.min_f);
    rep.critical_omega = nyq.critical_omega;
    return rep;
}

}  // namespace hydroloop::synthesis
