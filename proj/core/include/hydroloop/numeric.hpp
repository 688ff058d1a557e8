#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

// Small numerical kernels shared by the design modules.
namespace hydroloop::numeric {

struct ScalarMinimum {
    double x;
    double fx;
};

// Golden-section search for a minimum of a unimodal function on [lo, hi].
// Stops when the bracket is narrower than rel_tol * max(|x|, tiny).
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double rel_tol = 1e-8, int max_iter = 200);

// Same search carried out in log-coordinates; lo and hi must be positive.
ScalarMinimum golden_section_minimize_log(const std::function<double(double)>& f, double lo,
                                          double hi, double rel_tol = 1e-8, int max_iter = 200);

// Composite Simpson weights for n (odd, >= 3) equally spaced nodes over [a, b].
// Degenerate interval (a == b) yields weights summing to zero.
std::vector<double> simpson_weights(std::size_t n, double a, double b);

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double lo, double hi, std::size_t n);

struct NelderMeadOptions {
    int max_evaluations = 400;
    double x_tol = 1e-10;
    double f_tol = 1e-14;
    // Optional early exit: stop as soon as the best value is <= target.
    double target = -std::numeric_limits<double>::infinity();
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx;
    int evaluations;
};

// Derivative-free simplex minimizer. `step` gives the initial simplex edge per
// coordinate. Deterministic for identical inputs.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             const NelderMeadOptions& opts = {});

}  // namespace hydroloop::numeric
