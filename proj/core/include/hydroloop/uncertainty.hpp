#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "hydroloop/lti.hpp"
#include "hydroloop/plant.hpp"

// Model uncertainty: integral-mean linearization, pole-parameter spread,
// round-trip-time statistics and the multiplicative weight W_U.
namespace hydroloop::uncertainty {

/// Rectangle of operating points (z, P_L / P_S) sampled on a Simpson grid.
struct OperatingRange {
    double z_lo = -1.0;
    double z_hi = 1.0;
    double pl_lo = -0.95;  // fraction of P_S
    double pl_hi = 0.95;
    int resolution = 401;  // nodes per axis, odd and >= 3

    static OperatingRange symmetric(double pl_fraction, int resolution = 401);
    // Collapsed to a single operating point.
    static OperatingRange point(double z, double pl_fraction, int resolution = 3);

    void validate() const;
};

// Integral means of C_q and C_qp over the range (tensor-product Simpson).
plant::LinearizationGains nominal_gains(const plant::PlantParams& p, const OperatingRange& range);

struct PoleParams {
    double k;
    double omega_n;
    double xi;
};

PoleParams pole_params(const plant::LinearizationGains& g, const plant::PlantParams& p);

struct OperatingPoint {
    double z;
    double p_load;  // [Pa]
};

struct DeviationReport {
    double k = 0.0;  // max |k - k_nom| / k_nom
    double omega_n = 0.0;
    double xi = 0.0;
    OperatingPoint k_at{0.0, 0.0};
    OperatingPoint omega_n_at{0.0, 0.0};
    OperatingPoint xi_at{0.0, 0.0};

    double k_ratio_max() const noexcept { return 1.0 + k; }
};

DeviationReport deviation_scan(const plant::PlantParams& p, const OperatingRange& range,
                               const plant::LinearizationGains& nominal);

/// Shifted gamma law of the round-trip time, quantized upward.
struct GammaFit {
    double shape = 1.0;
    double scale = 0.01;    // [s]
    double quantum = 0.01;  // [s]
    double tau_min = 0.01;  // [s]
    double tau_max = 0.11;  // [s]

    double tau_nom() const noexcept { return tau_min + shape * scale; }
    void validate() const;
};

struct GammaFitOptions {
    double tau_min = 0.01;
    double quantum = 0.01;
    double tau_max_bound = 0.11;  // reported tau_max is never below this
};

// Maximum-likelihood fit of shape and scale to the excess over tau_min.
// Samples sitting exactly on tau_min are counted at half a quantum.
GammaFit fit_gamma(std::span<const double> samples, const GammaFitOptions& opts = {});

// One round-trip time: tau_min + Gamma(shape, scale), rounded up to the quantum.
double sample_rtt(const GammaFit& fit, std::mt19937_64& rng);

class RttSampler {
public:
    RttSampler(const GammaFit& fit, std::uint64_t seed);
    double operator()();

private:
    GammaFit fit_;
    std::mt19937_64 rng_;
};

// |k e^{-i w tau} - 1|
double weight_target(double omega, double k_ratio_max, double tau_max);

/// k_w (s^2/wz^2 + 2 xi_z s/wz + 1) / (s^2/wp^2 + 2 xi_p s/wp + 1)
struct LeadWeight {
    double k_w;
    double omega_z;
    double xi_z;
    double omega_p;
    double xi_p;

    lti::TransferFunction tf() const;
    double magnitude(double omega) const;
    void validate() const;
};

// Least-squares lead fit to the rising envelope of weight_target, then k_w
// inflated until the weight dominates the target on a 10x denser grid.
LeadWeight fit_weight(double k_ratio_max, double tau_max, const lti::FrequencyGrid& grid);

// ||W_U T||inf for the loop C P_nom. Throws InstabilityError if the nominal
// loop fails the winding test.
lti::HinfNorm robust_stability_margin(const lti::TransferFunction& weight,
                                      const lti::TransferFunction& open_loop,
                                      const lti::FrequencyGrid& grid);

// One value per line (seconds). A non-numeric first line is taken as a header.
std::vector<double> read_rtt_csv(const std::filesystem::path& path);

}  // namespace hydroloop::uncertainty
