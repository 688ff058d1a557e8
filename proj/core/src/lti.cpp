#include "hydroloop/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hydroloop/error.hpp"
#include "hydroloop/numeric.hpp"

namespace hydroloop::lti {

namespace {

void trim(std::vector<double>& c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
}

Complex horner(const std::vector<double>& c, Complex s) {
    Complex acc{0.0, 0.0};
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
    return acc;
}

Complex horner_derivative(const std::vector<double>& c, Complex s) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = c.size(); k-- > 1;) acc = acc * s + static_cast<double>(k) * c[k];
    return acc;
}

// Sum of |c_k| |s|^k; scale against which a vanishing polynomial is judged.
double magnitude_scale(const std::vector<double>& c, double r) {
    double acc = 0.0;
    double p = 1.0;
    for (double ck : c) {
        acc += std::abs(ck) * p;
        p *= r;
    }
    return acc;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> binomial_poly(int minus_power, int plus_power) {
    // (1 - q)^minus_power * (1 + q)^plus_power in ascending powers of q
    std::vector<double> p{1.0};
    for (int i = 0; i < minus_power; ++i) p = convolve(p, {1.0, -1.0});
    for (int i = 0; i < plus_power; ++i) p = convolve(p, {1.0, 1.0});
    return p;
}

}  // namespace

TransferFunction::TransferFunction(std::vector<double> num, std::vector<double> den, double delay)
    : num_(std::move(num)), den_(std::move(den)), delay_(delay) {
    if (num_.empty()) num_.push_back(0.0);
    if (den_.empty()) throw ValidationError("transfer function: empty denominator");
    for (double c : num_)
        if (!std::isfinite(c)) throw ValidationError("transfer function: non-finite numerator coefficient");
    for (double c : den_)
        if (!std::isfinite(c)) throw ValidationError("transfer function: non-finite denominator coefficient");
    trim(num_);
    trim(den_);
    if (den_.size() == 1 && den_[0] == 0.0) throw ValidationError("transfer function: zero denominator");
    if (!(delay_ >= 0.0) || !std::isfinite(delay_))
        throw ValidationError("transfer function: delay must be finite and >= 0");
}

TransferFunction TransferFunction::gain(double k, double delay) { return {{k}, {1.0}, delay}; }

TransferFunction TransferFunction::integrator(double k) { return {{k}, {0.0, 1.0}}; }

TransferFunction TransferFunction::pure_delay(double delay) { return {{1.0}, {1.0}, delay}; }

int TransferFunction::origin_poles() const noexcept {
    int n = 0;
    while (static_cast<std::size_t>(n) < den_.size() && den_[static_cast<std::size_t>(n)] == 0.0) ++n;
    return n;
}

Complex TransferFunction::operator()(Complex s) const {
    Complex h = horner(num_, s) / horner(den_, s);
    if (delay_ != 0.0) h *= std::exp(-s * delay_);
    return h;
}

Complex TransferFunction::derivative(Complex s) const {
    const Complex n = horner(num_, s);
    const Complex d = horner(den_, s);
    const Complex dn = horner_derivative(num_, s);
    const Complex dd = horner_derivative(den_, s);
    const Complex e = delay_ != 0.0 ? std::exp(-s * delay_) : Complex{1.0, 0.0};
    return ((dn * d - n * dd) / (d * d) - delay_ * n / d) * e;
}

Complex TransferFunction::at(double omega) const {
    const Complex s{0.0, omega};
    const Complex d = horner(den_, s);
    const double scale = magnitude_scale(den_, std::abs(omega));
    if (std::abs(d) <= 1e-14 * scale || std::abs(d) == 0.0) {
        std::ostringstream msg;
        msg << "transfer function denominator vanishes at omega = " << omega << " rad/s";
        throw SingularFrequencyError(msg.str(), omega);
    }
    Complex h = horner(num_, s) / d;
    if (delay_ != 0.0) h *= std::polar(1.0, -omega * delay_);
    return h;
}

TransferFunction TransferFunction::with_delay(double delay) const { return {num_, den_, delay}; }

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : w_(std::move(omegas)) {
    if (w_.size() < 2) throw ValidationError("frequency grid needs at least two points");
    for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]) || w_[i] <= 0.0)
            throw ValidationError("frequency grid points must be finite and positive");
        if (i > 0 && !(w_[i] > w_[i - 1])) throw ValidationError("frequency grid must be strictly increasing");
    }
}

FrequencyGrid FrequencyGrid::logspace(double lo, double hi, std::size_t n) {
    return FrequencyGrid(numeric::logspace(lo, hi, n));
}

FrequencyGrid FrequencyGrid::default_grid(std::size_t n) { return logspace(1e-2, 1e4, n); }

FrequencyGrid FrequencyGrid::refined(std::size_t factor) const {
    return logspace(front(), back(), (size() - 1) * std::max<std::size_t>(factor, 1) + 1);
}

std::vector<Complex> freq_response(const TransferFunction& tf, const FrequencyGrid& grid) {
    std::vector<Complex> out;
    out.reserve(grid.size());
    for (double w : grid) out.push_back(tf.at(w));
    return out;
}

TransferFunction series(const TransferFunction& a, const TransferFunction& b) {
    return {convolve(a.numerator(), b.numerator()), convolve(a.denominator(), b.denominator()),
            a.delay() + b.delay()};
}

Complex closed_loop_T(const TransferFunction& open_loop, double omega) {
    const Complex l = open_loop.at(omega);
    const Complex rd = 1.0 + l;
    if (std::abs(rd) < 1e-12) {
        std::ostringstream msg;
        msg << "closed loop is singular at omega = " << omega << " rad/s (|1+L| < 1e-12)";
        throw InstabilityError(msg.str(), omega);
    }
    return l / rd;
}

std::vector<Complex> closed_loop_T(const TransferFunction& open_loop, const FrequencyGrid& grid) {
    std::vector<Complex> out;
    out.reserve(grid.size());
    for (double w : grid) out.push_back(closed_loop_T(open_loop, w));
    return out;
}

HinfNorm hinf_norm(std::span<const double> magnitudes, const FrequencyGrid& grid) {
    if (magnitudes.empty()) throw ValidationError("hinf_norm: empty magnitude set");
    if (magnitudes.size() != grid.size()) throw ValidationError("hinf_norm: grid/magnitude size mismatch");
    const auto it = std::max_element(magnitudes.begin(), magnitudes.end());
    const auto i = static_cast<std::size_t>(std::distance(magnitudes.begin(), it));
    return {*it, grid[i]};
}

HinfNorm hinf_norm(const FrequencyGrid& grid, const std::function<double(double)>& magnitude, bool refine) {
    std::vector<double> mags;
    mags.reserve(grid.size());
    for (double w : grid) mags.push_back(magnitude(w));
    HinfNorm best = hinf_norm(mags, grid);
    const auto i = static_cast<std::size_t>(
        std::distance(mags.begin(), std::max_element(mags.begin(), mags.end())));

    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(i + 1, grid.size() - 1);
    bool coarse = false;
    for (std::size_t k = lo; k < hi; ++k) {
        const double a = mags[k];
        const double b = mags[k + 1];
        if (std::max(a, b) > 0.0 && std::abs(a - b) > 0.2 * std::max(a, b)) coarse = true;
    }
    if ((refine || coarse) && lo != hi) {
        const auto m = numeric::golden_section_minimize_log([&](double w) { return -magnitude(w); },
                                                            grid[lo], grid[hi], 1e-9);
        if (-m.fx > best.peak) best = {-m.fx, m.x};
    }
    return best;
}

DiscreteFilter::DiscreteFilter(std::vector<double> b, std::vector<double> a, double Ts)
    : b_(std::move(b)), a_(std::move(a)), ts_(Ts) {
    if (!(Ts > 0.0)) throw ValidationError("discrete filter: sample period must be > 0");
    if (a_.empty() || a_[0] == 0.0) throw ValidationError("discrete filter: a[0] must be nonzero");
    if (b_.empty()) b_.push_back(0.0);
    const double a0 = a_[0];
    for (auto& c : a_) c /= a0;
    for (auto& c : b_) c /= a0;
    const std::size_t n = std::max(a_.size(), b_.size());
    a_.resize(n, 0.0);
    b_.resize(n, 0.0);
    state_.assign(n - 1, 0.0);
}

double DiscreteFilter::step(double x) {
    const std::size_t n = state_.size();
    const double y = b_[0] * x + (n > 0 ? state_[0] : 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double next = k + 1 < n ? state_[k + 1] : 0.0;
        state_[k] = next + b_[k + 1] * x - a_[k + 1] * y;
    }
    return y;
}

void DiscreteFilter::reset() noexcept { std::fill(state_.begin(), state_.end(), 0.0); }

void DiscreteFilter::prime(double x) {
    const double g = dc_gain();
    if (!std::isfinite(g)) throw ValidationError("discrete filter: cannot prime a filter with unbounded DC gain");
    const double y = g * x;
    const std::size_t n = state_.size();
    // steady state of the transposed form: s_k = sum_{j>k} (b_j x - a_j y)
    for (std::size_t k = n; k-- > 0;) {
        const double next = k + 1 < n ? state_[k + 1] : 0.0;
        state_[k] = next + b_[k + 1] * x - a_[k + 1] * y;
    }
}

double DiscreteFilter::dc_gain() const {
    double nb = 0.0;
    double na = 0.0;
    for (double c : b_) nb += c;
    for (double c : a_) na += c;
    if (na == 0.0) return nb == 0.0 ? 0.0 : std::copysign(INFINITY, nb);
    return nb / na;
}

Complex DiscreteFilter::response(double omega) const {
    const Complex zinv = std::polar(1.0, -omega * ts_);
    return horner(b_, zinv) / horner(a_, zinv);
}

DiscreteFilter tustin_discretize(const TransferFunction& tf, double Ts) {
    if (tf.delay() != 0.0)
        throw ValidationError("tustin_discretize: transfer function carries a delay; model it in the channel");
    if (!(Ts > 0.0)) throw ValidationError("tustin_discretize: Ts must be > 0");
    if (!tf.is_proper()) throw ValidationError("tustin_discretize: transfer function must be proper");

    const auto n = static_cast<int>(tf.den_degree());
    const double c = 2.0 / Ts;
    std::vector<double> b(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
    // s^k -> c^k (1 - q)^k (1 + q)^(n-k) / (1 + q)^n with q = z^-1
    double ck = 1.0;
    for (int k = 0; k <= n; ++k) {
        const auto basis = binomial_poly(k, n - k);
        const auto ks = static_cast<std::size_t>(k);
        const double nk = ks < tf.numerator().size() ? tf.numerator()[ks] : 0.0;
        const double dk = ks < tf.denominator().size() ? tf.denominator()[ks] : 0.0;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            b[j] += nk * ck * basis[j];
            a[j] += dk * ck * basis[j];
        }
        ck *= c;
    }
    return DiscreteFilter(std::move(b), std::move(a), Ts);
}

NyquistResult nyquist_check(const FrequencyFunction& open_loop, int origin_poles, double w_lo, double w_hi) {
    if (!(w_lo > 0.0 && w_hi > w_lo)) throw ValidationError("nyquist_check: invalid frequency range");

    // extend the sweep until the locus has collapsed toward the origin
    for (int k = 0; k < 8 && std::abs(open_loop(w_hi)) > 1e-2; ++k) w_hi *= 10.0;

    auto arg_of = [&](double w) { return std::arg(1.0 + open_loop(w)); };
    auto wrap = [](double d) {
        while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
        while (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
        return d;
    };

    const auto coarse = numeric::logspace(w_lo, w_hi, 4000);
    double total = 0.0;
    double crit_w = coarse.front();
    double crit = std::abs(1.0 + open_loop(crit_w));

    // recursive bisection in log-frequency keeps every phase step below pi/4
    std::function<double(double, double, double, double, int)> sweep =
        [&](double wa, double pa, double wb, double pb, int depth) -> double {
        const double d = wrap(pb - pa);
        if (std::abs(d) <= std::numbers::pi / 4.0 || depth > 40) return d;
        const double wm = std::sqrt(wa * wb);
        const double pm = arg_of(wm);
        const double rd = std::abs(1.0 + open_loop(wm));
        if (rd < crit) {
            crit = rd;
            crit_w = wm;
        }
        return sweep(wa, pa, wm, pm, depth + 1) + sweep(wm, pm, wb, pb, depth + 1);
    };

    double prev_w = coarse.front();
    double prev_p = arg_of(prev_w);
    for (std::size_t i = 1; i < coarse.size(); ++i) {
        const double w = coarse[i];
        const double p = arg_of(w);
        const double rd = std::abs(1.0 + open_loop(w));
        if (rd < crit) {
            crit = rd;
            crit_w = w;
        }
        total += sweep(prev_w, prev_p, w, p, 0);
        prev_w = w;
        prev_p = p;
    }
    const double z = 0.5 * origin_poles - total / std::numbers::pi;
    return {static_cast<int>(std::lround(z)), crit_w, crit};
}

}  // namespace hydroloop::lti
