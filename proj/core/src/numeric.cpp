#include "hydroloop/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hydroloop::numeric {

namespace {
constexpr double kInvPhi = 0.6180339887498949;  // 1/phi
}

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double rel_tol, int max_iter) {
    if (hi < lo) std::swap(lo, hi);
    double c = hi - kInvPhi * (hi - lo);
    double d = lo + kInvPhi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter; ++it) {
        const double scale = std::max({std::abs(c), std::abs(d), 1e-300});
        if (hi - lo <= rel_tol * scale) break;
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - kInvPhi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + kInvPhi * (hi - lo);
            fd = f(d);
        }
    }
    return fc < fd ? ScalarMinimum{c, fc} : ScalarMinimum{d, fd};
}

ScalarMinimum golden_section_minimize_log(const std::function<double(double)>& f, double lo,
                                          double hi, double rel_tol, int max_iter) {
    if (!(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("log-space search needs positive bounds");
    auto g = [&f](double u) { return f(std::exp(u)); };
    // a relative tolerance on x maps to an absolute one on log(x)
    const double ulo = std::log(lo);
    const double uhi = std::log(hi);
    const double abs_tol = rel_tol;
    double a = std::min(ulo, uhi);
    double b = std::max(ulo, uhi);
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = g(c);
    double fd = g(d);
    for (int it = 0; it < max_iter && (b - a) > abs_tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = g(d);
        }
    }
    return fc < fd ? ScalarMinimum{std::exp(c), fc} : ScalarMinimum{std::exp(d), fd};
}

std::vector<double> simpson_weights(std::size_t n, double a, double b) {
    if (n < 3 || n % 2 == 0) throw std::invalid_argument("Simpson rule needs an odd node count >= 3");
    const double h = (b - a) / static_cast<double>(n - 1);
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || i == n - 1)
            w[i] = 1.0;
        else
            w[i] = (i % 2 == 1) ? 4.0 : 2.0;
        w[i] *= h / 3.0;
    }
    return w;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {a};
    std::vector<double> out(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + h * static_cast<double>(i);
    out.back() = b;
    return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("logspace needs positive bounds");
    auto u = linspace(std::log10(lo), std::log10(hi), n);
    for (auto& v : u) v = std::pow(10.0, v);
    if (n >= 1) u.front() = lo;
    if (n >= 2) u.back() = hi;
    return u;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    if (step.size() != n) throw std::invalid_argument("nelder_mead: step size mismatch");

    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
    std::vector<double> vals(n + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);

    while (evals < opts.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        if (vals[best] <= opts.target) break;

        double spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                spread = std::max(spread, std::abs(pts[i][k] - pts[best][k]));
        if (spread < opts.x_tol && std::abs(vals[worst] - vals[best]) < opts.f_tol) break;
        if (spread < opts.x_tol * 1e-3) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
        }
        for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + (centroid[k] - pts[worst][k]);
        const double fr = eval(xr);

        if (fr < vals[best]) {
            for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - pts[worst][k]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        for (std::size_t k = 0; k < n; ++k)
            xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k])
                            : centroid[k] + 0.5 * (pts[worst][k] - centroid[k]);
        const double fcon = eval(xc);
        if (fcon < (outside ? fr : vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fcon;
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
            vals[i] = eval(pts[i]);
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    const auto idx = static_cast<std::size_t>(std::distance(vals.begin(), it));
    return {pts[idx], vals[idx], evals};
}

}  // namespace hydroloop::numeric
