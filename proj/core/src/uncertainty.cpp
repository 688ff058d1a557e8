#include "hydroloop/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "hydroloop/error.hpp"
#include "hydroloop/numeric.hpp"

namespace hydroloop::uncertainty {

namespace {

// Simpson weights normalised to unit sum; a collapsed axis averages its nodes.
std::vector<double> mean_weights(std::size_t n, double lo, double hi) {
    if (lo == hi) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    auto w = numeric::simpson_weights(n, lo, hi);
    const double span = hi - lo;
    for (double& x : w) x /= span;
    return w;
}

}  // namespace

OperatingRange OperatingRange::symmetric(double pl_fraction, int resolution) {
    OperatingRange r;
    r.pl_lo = -pl_fraction;
    r.pl_hi = pl_fraction;
    r.resolution = resolution;
    r.validate();
    return r;
}

OperatingRange OperatingRange::point(double z, double pl_fraction, int resolution) {
    OperatingRange r{z, z, pl_fraction, pl_fraction, resolution};
    r.validate();
    return r;
}

void OperatingRange::validate() const {
    if (resolution < 3 || resolution % 2 == 0)
        throw ValidationError("operating range: resolution must be odd and >= 3");
    if (!(z_lo <= z_hi) || z_lo < -1.0 || z_hi > 1.0)
        throw ValidationError("operating range: z interval must lie in [-1, 1]");
    if (!(pl_lo <= pl_hi) || pl_lo < -0.95 || pl_hi > 0.95)
        throw ValidationError("operating range: P_L fraction must lie in [-0.95, 0.95]");
}

plant::LinearizationGains nominal_gains(const plant::PlantParams& p, const OperatingRange& range) {
    range.validate();
    const auto n = static_cast<std::size_t>(range.resolution);
    const auto z = numeric::linspace(range.z_lo, range.z_hi, n);
    const auto pl = numeric::linspace(range.pl_lo * p.P_S, range.pl_hi * p.P_S, n);
    const auto wz = mean_weights(n, range.z_lo, range.z_hi);
    const auto wp = mean_weights(n, range.pl_lo, range.pl_hi);

    double cq = 0.0;
    double cqp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto g = plant::linearize(z[i], pl[j], p);
            const double w = wz[i] * wp[j];
            cq += w * g.C_q;
            cqp += w * g.C_qp;
        }
    }
    return {cq, cqp};
}

PoleParams pole_params(const plant::LinearizationGains& g, const plant::PlantParams& p) {
    const double q = p.sigma_lin * g.C_qp + p.A_bar * p.A_bar;
    const double omega_n = std::sqrt(4.0 * p.E * q / (p.m * p.V_t));
    const double bracket = (g.C_qp * p.m + p.sigma_lin * p.V_t / (4.0 * p.E)) / q;
    return {g.C_q * p.A_bar / q, omega_n, 0.5 * bracket * omega_n};
}

DeviationReport deviation_scan(const plant::PlantParams& p, const OperatingRange& range,
                               const plant::LinearizationGains& nominal) {
    range.validate();
    const PoleParams ref = pole_params(nominal, p);
    const auto n = static_cast<std::size_t>(range.resolution);
    const auto z = numeric::linspace(range.z_lo, range.z_hi, n);
    const auto pl = numeric::linspace(range.pl_lo * p.P_S, range.pl_hi * p.P_S, n);

    DeviationReport rep;
    auto track = [](double dev, double& best, OperatingPoint& at, double zi, double pj) {
        if (dev > best) {
            best = dev;
            at = {zi, pj};
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const PoleParams pp = pole_params(plant::linearize(z[i], pl[j], p), p);
            track(std::abs(pp.k - ref.k) / ref.k, rep.k, rep.k_at, z[i], pl[j]);
            track(std::abs(pp.omega_n - ref.omega_n) / ref.omega_n, rep.omega_n, rep.omega_n_at, z[i], pl[j]);
            track(std::abs(pp.xi - ref.xi) / ref.xi, rep.xi, rep.xi_at, z[i], pl[j]);
        }
    }
    return rep;
}

void GammaFit::validate() const {
    if (!(shape > 0.0) || !(scale > 0.0)) throw ValidationError("gamma fit: shape and scale must be > 0");
    if (!(quantum > 0.0)) throw ValidationError("gamma fit: quantum must be > 0");
    if (!(tau_min >= quantum * (1.0 - 1e-12))) throw ValidationError("gamma fit: tau_min must be >= quantum");
    if (!(tau_max > tau_min)) throw ValidationError("gamma fit: tau_max must exceed tau_min");
}

GammaFit fit_gamma(std::span<const double> samples, const GammaFitOptions& opts) {
    constexpr std::size_t min_samples = 50;
    if (samples.size() < min_samples) {
        std::ostringstream msg;
        msg << "fit_gamma: need at least " << min_samples << " samples, got " << samples.size();
        throw InsufficientDataError(msg.str());
    }
    // A sample at tau_min has zero excess and no logarithm; it stands in for
    // the lower half of its quantization bin.
    const double floor_excess = 0.5 * opts.quantum;
    std::vector<double> excess;
    excess.reserve(samples.size());
    for (double s : samples) {
        if (!std::isfinite(s)) throw ValidationError("fit_gamma: non-finite sample");
        const double e = s - opts.tau_min;
        if (e < -1e-12) {
            std::ostringstream msg;
            msg << "fit_gamma: sample " << s << " lies below tau_min = " << opts.tau_min;
            throw ValidationError(msg.str());
        }
        excess.push_back(e > 1e-12 ? e : floor_excess);
    }
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) throw FitError("fit_gamma: all samples are identical; the fit is degenerate");

    const double n = static_cast<double>(excess.size());
    const double mean = std::accumulate(excess.begin(), excess.end(), 0.0) / n;
    double mean_log = 0.0;
    for (double e : excess) mean_log += std::log(e);
    mean_log /= n;
    const double s = std::log(mean) - mean_log;
    if (!(s > 0.0)) throw FitError("fit_gamma: degenerate sample spread");

    double alpha = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int it = 0; it < 100; ++it) {
        const double g = std::log(alpha) - boost::math::digamma(alpha) - s;
        const double dg = 1.0 / alpha - boost::math::trigamma(alpha);
        double next = alpha - g / dg;
        if (!(next > 0.0)) next = 0.5 * alpha;
        const bool done = std::abs(next - alpha) <= 1e-12 * alpha;
        alpha = next;
        if (done) break;
    }
    if (!std::isfinite(alpha) || !(alpha > 0.0)) throw FitError("fit_gamma: shape iteration diverged");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = 0.999 * (n - 1.0);
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    const std::size_t i1 = std::min(i0 + 1, sorted.size() - 1);
    const double p999 = sorted[i0] + (pos - static_cast<double>(i0)) * (sorted[i1] - sorted[i0]);

    GammaFit fit{alpha, mean / alpha, opts.quantum, opts.tau_min, std::max(opts.tau_max_bound, p999)};
    fit.validate();
    return fit;
}

double sample_rtt(const GammaFit& fit, std::mt19937_64& rng) {
    std::gamma_distribution<double> dist(fit.shape, fit.scale);
    const double raw = fit.tau_min + dist(rng);
    const double steps = std::ceil(raw / fit.quantum - 1e-9);
    return std::max(fit.tau_min, steps * fit.quantum);
}

RttSampler::RttSampler(const GammaFit& fit, std::uint64_t seed) : fit_(fit), rng_(seed) { fit_.validate(); }

double RttSampler::operator()() { return sample_rtt(fit_, rng_); }

double weight_target(double omega, double k_ratio_max, double tau_max) {
    const double k = k_ratio_max;
    return std::sqrt(std::max(0.0, k * k - 2.0 * k * std::cos(omega * tau_max) + 1.0));
}

lti::TransferFunction LeadWeight::tf() const {
    return lti::TransferFunction({k_w, 2.0 * k_w * xi_z / omega_z, k_w / (omega_z * omega_z)},
                                 {1.0, 2.0 * xi_p / omega_p, 1.0 / (omega_p * omega_p)});
}

double LeadWeight::magnitude(double omega) const {
    const lti::Complex s{0.0, omega};
    const lti::Complex num = s * s / (omega_z * omega_z) + 2.0 * xi_z * s / omega_z + 1.0;
    const lti::Complex den = s * s / (omega_p * omega_p) + 2.0 * xi_p * s / omega_p + 1.0;
    return k_w * std::abs(num / den);
}

void LeadWeight::validate() const {
    if (!(k_w > 0.0 && omega_z > 0.0 && xi_z > 0.0 && omega_p > 0.0 && xi_p > 0.0))
        throw ValidationError("lead weight: all parameters must be > 0");
    if (!(omega_z < omega_p)) throw ValidationError("lead weight: omega_z must be below omega_p");
}

LeadWeight fit_weight(double k_ratio_max, double tau_max, const lti::FrequencyGrid& grid) {
    if (!(k_ratio_max > 0.0) || !(tau_max > 0.0))
        throw ValidationError("fit_weight: k_ratio_max and tau_max must be > 0");

    const auto fit_w = numeric::logspace(grid.front(), grid.back(), 400);
    std::vector<double> log_env(fit_w.size());
    double running = 0.0;
    for (std::size_t i = 0; i < fit_w.size(); ++i) {
        running = std::max(running, weight_target(fit_w[i], k_ratio_max, tau_max));
        log_env[i] = std::log(std::max(running, 1e-9));
    }

    auto unpack = [](const std::vector<double>& x) {
        const double wz = std::exp(x[1]);
        return LeadWeight{std::exp(x[0]), wz, std::exp(x[2]), wz * (1.0 + std::exp(x[3])), std::exp(x[4])};
    };
    auto cost = [&](const std::vector<double>& x) {
        const LeadWeight w = unpack(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < fit_w.size(); ++i) {
            const double r = std::log(w.magnitude(fit_w[i])) - log_env[i];
            acc += r * r;
        }
        return std::isfinite(acc) ? acc : std::numeric_limits<double>::max();
    };

    const double low = std::max(std::abs(k_ratio_max - 1.0), 1e-3);
    const double ratio = std::max((k_ratio_max + 1.0) / low, 1.0 + 1e-3);
    const double pole_gap = std::log(std::max(std::sqrt(ratio) - 1.0, 1e-3));
    numeric::NelderMeadOptions opts;
    opts.max_evaluations = 3000;

    numeric::NelderMeadResult best{{}, std::numeric_limits<double>::infinity(), 0};
    for (double corner : {0.25, 0.5, 1.0, 2.0}) {
        for (double xi_z : {0.5, 1.0}) {
            const std::vector<double> x0{std::log(low), std::log(corner / tau_max), std::log(xi_z), pole_gap,
                                         std::log(0.7)};
            auto r = numeric::nelder_mead(cost, x0, {0.3, 0.5, 0.3, 0.5, 0.3}, opts);
            r = numeric::nelder_mead(cost, r.x, {0.1, 0.1, 0.1, 0.1, 0.1}, opts);
            if (r.fx < best.fx) best = r;
        }
    }
    LeadWeight w = unpack(best.x);
    if (!(w.omega_z < w.omega_p) || !std::isfinite(w.k_w)) {
        std::ostringstream msg;
        msg << "fit_weight: optimizer did not return a stable lead (omega_z = " << w.omega_z
            << ", omega_p = " << w.omega_p << ", residual = " << best.fx << ")";
        throw FitError(msg.str());
    }

    double factor = 1.0;
    for (double om : grid.refined(10)) factor = std::max(factor, weight_target(om, k_ratio_max, tau_max) / w.magnitude(om));
    factor = std::max(factor, std::abs(k_ratio_max - 1.0) / w.k_w);
    factor = std::max(factor, (k_ratio_max + 1.0) * w.omega_z * w.omega_z / (w.k_w * w.omega_p * w.omega_p));
    w.k_w *= factor * (1.0 + 1e-12);
    w.validate();
    return w;
}

lti::HinfNorm robust_stability_margin(const lti::TransferFunction& weight, const lti::TransferFunction& open_loop,
                                      const lti::FrequencyGrid& grid) {
    const auto nyq = lti::nyquist_check([&](double w) { return open_loop.at(w); }, open_loop.origin_poles(),
                                        grid.front(), grid.back());
    if (nyq.unstable_poles != 0) {
        std::ostringstream msg;
        msg << "robust margin undefined: nominal loop has " << nyq.unstable_poles
            << " unstable closed-loop pole(s); locus closest to -1 at " << nyq.critical_omega << " rad/s";
        throw InstabilityError(msg.str(), nyq.critical_omega);
    }
    return lti::hinf_norm(grid, [&](double w) { return std::abs(weight.at(w) * lti::closed_loop_T(open_loop, w)); });
}

std::vector<double> read_rtt_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open RTT sample file: " + path.string());
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r,");
        const std::string cell = line.substr(first, last - first + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != cell.size() || used == 0) {
            if (out.empty() && line_no == 1) continue;
            std::ostringstream msg;
            msg << path.string() << ":" << line_no << ": not a number: '" << cell << "'";
            throw ValidationError(msg.str());
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace hydroloop::uncertainty
