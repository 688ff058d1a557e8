#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

// Frequency-domain and sampled-time machinery for SISO rational transfer
// functions with an exact transport delay.
namespace hydroloop::lti {

using Complex = std::complex<double>;

// Callable returning a complex response at angular frequency omega [rad/s].
using FrequencyFunction = std::function<Complex(double)>;

/// Rational transfer function N(s)/D(s) * exp(-s*delay).
///
/// Coefficients are stored in ascending powers of s. Trailing zero
/// coefficients are trimmed on construction, so the highest stored
/// denominator coefficient is always nonzero. Improper objects (for example
/// an ideal PID) are representable; operations that need properness check it.
class TransferFunction {
public:
    TransferFunction(std::vector<double> num, std::vector<double> den, double delay = 0.0);

    static TransferFunction gain(double k, double delay = 0.0);
    static TransferFunction integrator(double k = 1.0);
    static TransferFunction pure_delay(double delay);

    const std::vector<double>& numerator() const noexcept { return num_; }
    const std::vector<double>& denominator() const noexcept { return den_; }
    double delay() const noexcept { return delay_; }

    std::size_t num_degree() const noexcept { return num_.size() - 1; }
    std::size_t den_degree() const noexcept { return den_.size() - 1; }
    bool is_proper() const noexcept { return num_degree() <= den_degree(); }

    // Number of poles at s = 0 (leading zero denominator coefficients).
    int origin_poles() const noexcept;

    // H(s) at an arbitrary complex point, delay included. No singularity check.
    Complex operator()(Complex s) const;
    // dH/ds at s, delay included.
    Complex derivative(Complex s) const;
    // H(i*omega); throws SingularFrequencyError when D(i*omega) vanishes.
    Complex at(double omega) const;

    TransferFunction with_delay(double delay) const;

private:
    std::vector<double> num_;
    std::vector<double> den_;
    double delay_;
};

/// Strictly increasing, positive angular frequencies (at least two).
class FrequencyGrid {
public:
    explicit FrequencyGrid(std::vector<double> omegas);

    static FrequencyGrid logspace(double lo, double hi, std::size_t n);
    // 2000 log-spaced points over [1e-2, 1e4] rad/s unless n overrides.
    static FrequencyGrid default_grid(std::size_t n = 2000);

    const std::vector<double>& omegas() const noexcept { return w_; }
    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    double front() const { return w_.front(); }
    double back() const { return w_.back(); }
    auto begin() const noexcept { return w_.begin(); }
    auto end() const noexcept { return w_.end(); }

    // Same span with `factor` times as many log-spaced points.
    FrequencyGrid refined(std::size_t factor) const;

private:
    std::vector<double> w_;
};

std::vector<Complex> freq_response(const TransferFunction& tf, const FrequencyGrid& grid);

// Cascade a then b: polynomials multiplied, delays summed, nothing cancelled.
TransferFunction series(const TransferFunction& a, const TransferFunction& b);

// Complementary sensitivity L/(1+L) of a unity negative-feedback loop.
// Throws InstabilityError when |1 + L| < 1e-12 at a grid point.
std::vector<Complex> closed_loop_T(const TransferFunction& open_loop, const FrequencyGrid& grid);
Complex closed_loop_T(const TransferFunction& open_loop, double omega);

struct HinfNorm {
    double peak;
    double omega;
};

// Supremum of a magnitude function over the grid. The coarse peak is polished
// by golden-section search between its neighbours when `refine` is set or
// when the grid is too coarse there (neighbouring magnitudes differ > 20%).
HinfNorm hinf_norm(const FrequencyGrid& grid, const std::function<double(double)>& magnitude,
                   bool refine = true);
// Grid-only variant over precomputed magnitudes.
HinfNorm hinf_norm(std::span<const double> magnitudes, const FrequencyGrid& grid);

/// IIR filter y = B(z^-1)/A(z^-1) x in transposed direct form II.
/// a[0] is normalised to 1.
class DiscreteFilter {
public:
    DiscreteFilter(std::vector<double> b, std::vector<double> a, double Ts);

    double step(double x);
    void reset() noexcept;
    // Set the internal state to the steady state for constant input x.
    void prime(double x);

    const std::vector<double>& b() const noexcept { return b_; }
    const std::vector<double>& a() const noexcept { return a_; }
    double sample_period() const noexcept { return ts_; }
    std::size_t order() const noexcept { return state_.size(); }
    const std::vector<double>& state() const noexcept { return state_; }

    // Gain at z = 1 (infinite when the filter contains an accumulator).
    double dc_gain() const;
    Complex response(double omega) const;

private:
    std::vector<double> b_;
    std::vector<double> a_;
    double ts_;
    std::vector<double> state_;
};

// Bilinear substitution s <- (2/Ts)(z-1)/(z+1). The transfer function must be
// proper and delay-free; transport delay belongs to the channel model.
DiscreteFilter tustin_discretize(const TransferFunction& tf, double Ts);

struct NyquistResult {
    // Closed-loop poles in the open right half-plane implied by the winding.
    int unstable_poles;
    // Frequency at which the locus passes closest to -1.
    double critical_omega;
    double min_return_difference;
};

// Winding-number test of 1 + L(i w) for an open loop with no right-half-plane
// poles and `origin_poles` poles at s = 0. The sweep is refined adaptively so
// consecutive phase samples never differ by more than pi/4 and is extended at
// the top until |L| is small.
NyquistResult nyquist_check(const FrequencyFunction& open_loop, int origin_poles, double w_lo,
                            double w_hi);

}  // namespace hydroloop::lti
