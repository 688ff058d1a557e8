#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "hydroloop/numeric.hpp"

using namespace hydroloop::numeric;

TEST(GoldenSection, FindsParabolaVertex) {
    const auto m = golden_section_minimize([](double x) { return (x - 2.0) * (x - 2.0) + 1.0; }, -5.0, 7.0, 1e-10);
    EXPECT_NEAR(m.x, 2.0, 1e-6);
    EXPECT_NEAR(m.fx, 1.0, 1e-14);
}

TEST(GoldenSection, LogSearchSpansDecades) {
    const auto m = golden_section_minimize_log([](double x) { return std::pow(std::log(x / 300.0), 2); }, 1e-2, 1e4);
    EXPECT_NEAR(m.x / 300.0, 1.0, 1e-6);
}

TEST(GoldenSection, LogSearchRejectsNonPositiveBounds) {
    EXPECT_THROW(golden_section_minimize_log([](double x) { return x; }, 0.0, 1.0), std::invalid_argument);
}

TEST(Simpson, ExactForCubics) {
    const auto w = simpson_weights(11, -1.0, 3.0);
    const auto x = linspace(-1.0, 3.0, 11);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * (x[i] * x[i] * x[i] - 2.0 * x[i] + 5.0);
    // x^4/4 - x^2 + 5x on [-1, 3]
    const double exact = (81.0 / 4.0 - 9.0 + 15.0) - (0.25 - 1.0 - 5.0);
    EXPECT_NEAR(s, exact, 1e-12);
}

TEST(Simpson, DegenerateIntervalHasZeroWeights) {
    const auto w = simpson_weights(5, 2.0, 2.0);
    EXPECT_EQ(std::accumulate(w.begin(), w.end(), 0.0), 0.0);
}

TEST(Simpson, RejectsEvenNodeCount) {
    EXPECT_THROW(simpson_weights(4, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(simpson_weights(1, 0.0, 1.0), std::invalid_argument);
}

TEST(Spacing, LinspaceAndLogspaceHitEndpoints) {
    const auto a = linspace(0.0, 1.0, 5);
    EXPECT_DOUBLE_EQ(a.front(), 0.0);
    EXPECT_DOUBLE_EQ(a[2], 0.5);
    EXPECT_DOUBLE_EQ(a.back(), 1.0);
    const auto b = logspace(1e-2, 1e4, 7);
    EXPECT_NEAR(b.front(), 1e-2, 1e-16);
    EXPECT_NEAR(b[3], 10.0, 1e-12);
    EXPECT_NEAR(b.back(), 1e4, 1e-9);
}

TEST(NelderMead, MinimizesRosenbrock) {
    auto rosen = [](const std::vector<double>& v) {
        return 100.0 * std::pow(v[1] - v[0] * v[0], 2) + std::pow(1.0 - v[0], 2);
    };
    NelderMeadOptions opts;
    opts.max_evaluations = 5000;
    const auto r = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, opts);
    EXPECT_NEAR(r.x[0], 1.0, 1e-4);
    EXPECT_NEAR(r.x[1], 1.0, 1e-4);
    EXPECT_LE(r.evaluations, 5000);
}

TEST(NelderMead, StopsAtTarget) {
    NelderMeadOptions opts;
    opts.target = 0.5;
    const auto r = nelder_mead([](const std::vector<double>& v) { return v[0] * v[0]; }, {10.3}, {1.0}, opts);
    EXPECT_LE(r.fx, 0.5);
    EXPECT_GT(r.fx, 0.0);
}

TEST(NelderMead, IsDeterministic) {
    auto f = [](const std::vector<double>& v) { return std::sin(3 * v[0]) + v[1] * v[1] + 0.1 * v[0] * v[0]; };
    const auto a = nelder_mead(f, {1.0, 1.0}, {0.3, 0.3});
    const auto b = nelder_mead(f, {1.0, 1.0}, {0.3, 0.3});
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(NelderMead, RejectsStepSizeMismatch) {
    EXPECT_THROW(nelder_mead([](const std::vector<double>&) { return 0.0; }, {1.0, 2.0}, {1.0}),
                 std::invalid_argument);
}
