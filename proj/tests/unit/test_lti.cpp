#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hydroloop/error.hpp"
#include "hydroloop/lti.hpp"
#include "test_support.hpp"

using namespace hydroloop;
using lti::Complex;
using lti::TransferFunction;

namespace {

TransferFunction second_order(double wn, double xi) { return {{wn * wn}, {wn * wn, 2.0 * xi * wn, 1.0}}; }

}  // namespace

TEST(TransferFunction, EvaluatesFirstOrderLag) {
    const TransferFunction g({1.0}, {1.0, 1.0});
    const Complex v = g.at(1.0);
    EXPECT_NEAR(v.real(), 0.5, 1e-15);
    EXPECT_NEAR(v.imag(), -0.5, 1e-15);
}

TEST(TransferFunction, DelayOnlyRotatesPhase) {
    const TransferFunction a({2.0}, {1.0, 0.1});
    const auto b = a.with_delay(0.03);
    for (double w : {0.1, 3.0, 40.0, 900.0}) {
        EXPECT_NEAR(std::abs(b.at(w)), std::abs(a.at(w)), 1e-14);
        EXPECT_NEAR(std::remainder(std::arg(b.at(w)) - std::arg(a.at(w)) + 0.03 * w, 2 * std::numbers::pi), 0.0,
                    1e-12);
    }
}

TEST(TransferFunction, RejectsInvalidCoefficients) {
    EXPECT_THROW(TransferFunction({1.0}, {}), ValidationError);
    EXPECT_THROW(TransferFunction({1.0}, {0.0}), ValidationError);
    EXPECT_THROW(TransferFunction({NAN}, {1.0}), ValidationError);
    EXPECT_THROW(TransferFunction({1.0}, {1.0, INFINITY}), ValidationError);
    EXPECT_THROW(TransferFunction({1.0}, {1.0}, -0.1), ValidationError);
}

TEST(TransferFunction, SingularFrequencyReportsOmega) {
    const TransferFunction g({1.0}, {1.0, 0.0, 1.0});  // poles at +-i
    try {
        (void)g.at(1.0);
        FAIL() << "expected SingularFrequencyError";
    } catch (const SingularFrequencyError& e) {
        EXPECT_DOUBLE_EQ(e.omega(), 1.0);
    }
}

TEST(TransferFunction, CountsOriginPoles) {
    EXPECT_EQ(fixture::reference_plant().origin_poles(), 1);
    EXPECT_EQ(TransferFunction({1.0}, {0.0, 0.0, 1.0}).origin_poles(), 2);
    EXPECT_EQ(TransferFunction({1.0}, {1.0, 1.0}).origin_poles(), 0);
}

TEST(TransferFunction, DerivativeMatchesCentralDifference) {
    const auto p = fixture::reference_plant();
    for (double w : {0.5, 12.0, 300.0, 1500.0}) {
        const Complex s{0.0, w};
        const double h = 1e-6 * w;
        const Complex fd = (p(s + Complex{0.0, h}) - p(s - Complex{0.0, h})) / Complex{0.0, 2 * h};
        EXPECT_LT(std::abs(p.derivative(s) - fd) / std::abs(fd), 1e-6) << "w=" << w;
    }
}

TEST(TransferFunction, SeriesMultipliesResponsesAndAddsDelays) {
    const TransferFunction a({1.0, 2.0}, {3.0, 1.0}, 0.01);
    const TransferFunction b({5.0}, {0.0, 1.0, 0.2}, 0.02);
    const auto c = lti::series(a, b);
    EXPECT_DOUBLE_EQ(c.delay(), 0.03);
    for (double w : {0.3, 7.0, 60.0}) EXPECT_LT(std::abs(c.at(w) - a.at(w) * b.at(w)), 1e-12 * std::abs(c.at(w)));
}

TEST(FrequencyGrid, DefaultGridIsLogUniform) {
    const auto g = lti::FrequencyGrid::default_grid();
    ASSERT_EQ(g.size(), 2000u);
    EXPECT_NEAR(g.front(), 1e-2, 1e-15);
    EXPECT_NEAR(g.back(), 1e4, 1e-8);
    const double ratio = g[1] / g[0];
    for (std::size_t i = 2; i < g.size(); ++i) ASSERT_NEAR(g[i] / g[i - 1], ratio, 1e-12);
}

TEST(FrequencyGrid, RejectsBadPoints) {
    EXPECT_THROW(lti::FrequencyGrid({1.0}), ValidationError);
    EXPECT_THROW(lti::FrequencyGrid({1.0, 1.0}), ValidationError);
    EXPECT_THROW(lti::FrequencyGrid({0.0, 1.0}), ValidationError);
    EXPECT_THROW(lti::FrequencyGrid({2.0, 1.0}), ValidationError);
}

TEST(FrequencyGrid, RefinedKeepsOriginalNodes) {
    const auto g = lti::FrequencyGrid::logspace(1.0, 100.0, 21);
    const auto r = g.refined(10);
    EXPECT_EQ(r.size(), 201u);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(r[10 * i], g[i], 1e-12 * g[i]);
}

TEST(ClosedLoop, ComplementarySensitivityMatchesDefinition) {
    const auto L = lti::series(TransferFunction({31.0, 12.7, 0.147}, {0.0, 1.0}), fixture::reference_plant());
    const auto grid = lti::FrequencyGrid::logspace(0.1, 1000.0, 50);
    const auto T = lti::closed_loop_T(L, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Complex l = L.at(grid[i]);
        EXPECT_LT(std::abs(T[i] - l / (1.0 + l)), 1e-12);
    }
}

class ResonancePeak : public ::testing::TestWithParam<double> {};

TEST_P(ResonancePeak, MatchesAnalyticValue) {
    const double xi = GetParam();
    const double expected = 1.0 / (2.0 * xi * std::sqrt(1.0 - xi * xi));
    for (double wn : {1.0, 1489.6}) {
        const auto g = second_order(wn, xi);
        const auto peak = lti::hinf_norm(lti::FrequencyGrid::default_grid(), [&](double w) { return std::abs(g.at(w)); });
        EXPECT_NEAR(peak.peak, expected, 1e-4) << "wn=" << wn;
        EXPECT_NEAR(peak.omega / (wn * std::sqrt(1.0 - 2.0 * xi * xi)), 1.0, 1e-3);
    }
}

INSTANTIATE_TEST_SUITE_P(Damping, ResonancePeak, ::testing::Values(0.1, 0.2, 0.318, 0.5));

TEST(HinfNorm, NeverBelowAnyGridSample) {
    const auto grid = lti::FrequencyGrid::default_grid();
    const auto g = second_order(37.0, 0.05);
    auto mag = [&](double w) { return std::abs(g.at(w)); };
    const auto peak = lti::hinf_norm(grid, mag);
    for (double w : grid) ASSERT_LE(mag(w), peak.peak * (1 + 1e-14));
}

TEST(HinfNorm, GridVariantPicksLargestSample) {
    const auto grid = lti::FrequencyGrid::logspace(1.0, 10.0, 4);
    const std::vector<double> m{1.0, 3.0, 2.0, 0.5};
    const auto peak = lti::hinf_norm(m, grid);
    EXPECT_EQ(peak.peak, 3.0);
    EXPECT_EQ(peak.omega, grid[1]);
    EXPECT_THROW(lti::hinf_norm(std::vector<double>{1.0}, grid), ValidationError);
}

TEST(Nyquist, IntegratorWithDoubleLagHasCriticalGainTwo) {
    // k / (s (s + 1)^2) is stable for k < 2
    for (const auto& [k, unstable] : std::vector<std::pair<double, int>>{{1.0, 0}, {1.9, 0}, {2.1, 2}, {5.0, 2}}) {
        const TransferFunction L({k}, {0.0, 1.0, 2.0, 1.0});
        const auto r = lti::nyquist_check([&](double w) { return L.at(w); }, 1, 1e-3, 1e3);
        EXPECT_EQ(r.unstable_poles, unstable) << "k=" << k;
    }
}

TEST(Nyquist, DelayedIntegratorLimit) {
    // k e^{-s} / s is stable for k < pi/2
    for (const auto& [k, stable] : std::vector<std::pair<double, bool>>{{1.0, true}, {1.5, true}, {1.7, false}}) {
        const TransferFunction L({k}, {0.0, 1.0}, 1.0);
        const auto r = lti::nyquist_check([&](double w) { return L.at(w); }, 1, 1e-3, 1e3);
        EXPECT_EQ(r.unstable_poles == 0, stable) << "k=" << k;
    }
}

TEST(Nyquist, RejectsEmptyRange) {
    EXPECT_THROW(lti::nyquist_check([](double) { return Complex{}; }, 0, 10.0, 1.0), ValidationError);
}

TEST(Tustin, MatchesWarpedContinuousResponse) {
    const double Ts = 0.01;
    const TransferFunction g({1.0}, {1.0, 2.0 / 257.0, 1.0 / (257.0 * 257.0)});
    const auto d = lti::tustin_discretize(g, Ts);
    for (double w : {1.0, 50.0, 200.0}) {
        const double warped = 2.0 / Ts * std::tan(w * Ts / 2.0);
        EXPECT_LT(std::abs(d.response(w) - g.at(warped)), 1e-12);
    }
    EXPECT_NEAR(d.dc_gain(), 1.0, 1e-14);
}

TEST(Tustin, StepResponseSettlesToDcGain) {
    auto d = lti::tustin_discretize(TransferFunction({3.0}, {1.0, 0.2}), 0.01);
    double y = 0.0;
    for (int k = 0; k < 1000; ++k) y = d.step(1.0);
    EXPECT_NEAR(y, 3.0, 1e-10);
}

TEST(Tustin, RejectsDelayAndImproperInput) {
    EXPECT_THROW(lti::tustin_discretize(TransferFunction({1.0}, {1.0, 1.0}, 0.1), 0.01), ValidationError);
    EXPECT_THROW(lti::tustin_discretize(TransferFunction({0.0, 0.0, 1.0}, {1.0, 1.0}), 0.01), ValidationError);
    EXPECT_THROW(lti::tustin_discretize(TransferFunction({1.0}, {1.0, 1.0}), 0.0), ValidationError);
}

TEST(DiscreteFilter, PrimeStartsInSteadyState) {
    auto d = lti::tustin_discretize(TransferFunction({1.0}, {1.0, 0.05}), 0.01);
    d.prime(0.7);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(d.step(0.7), 0.7, 1e-14);
    d.reset();
    EXPECT_LT(d.step(0.7), 0.7);
}

TEST(DiscreteFilter, AccumulatorCannotBePrimed) {
    lti::DiscreteFilter acc({1.0}, {1.0, -1.0}, 0.01);
    EXPECT_FALSE(std::isfinite(acc.dc_gain()));
    EXPECT_THROW(acc.prime(1.0), ValidationError);
    EXPECT_THROW(lti::DiscreteFilter({1.0}, {0.0, 1.0}, 0.01), ValidationError);
}
