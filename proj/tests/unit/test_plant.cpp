#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hydroloop/error.hpp"
#include "hydroloop/plant.hpp"
#include "hydroloop/uncertainty.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace hydroloop;
using namespace hydroloop::plant;

namespace {

const Calibration& cal() {
    static const Calibration c = fixture::default_calibration();
    return c;
}

}  // namespace

TEST(Orifice, ZeroSpoolGivesZeroFlow) {
    const auto& p = cal().plant;
    EXPECT_EQ(orifice_flow(0.0, 0.0, p), 0.0);
    EXPECT_EQ(orifice_flow(0.0, 0.9 * p.P_S, p), 0.0);
}

TEST(Orifice, FullOpeningAtZeroLoad) {
    const auto& p = cal().plant;
    EXPECT_DOUBLE_EQ(orifice_flow(1.0, 0.0, p), p.K * std::sqrt(p.P_S / 2.0));
    EXPECT_DOUBLE_EQ(orifice_flow(-1.0, 0.0, p), -p.K * std::sqrt(p.P_S / 2.0));
}

TEST(Orifice, OddInSpoolAndLoadTogether) {
    const auto& p = cal().plant;
    for (double z : {0.1, 0.5, 1.0})
        for (double pl : {-0.8e7, 0.0, 0.3e7}) EXPECT_DOUBLE_EQ(orifice_flow(-z, -pl, p), -orifice_flow(z, pl, p));
}

TEST(Orifice, CavitationNamesTheOperatingPoint) {
    const auto& p = cal().plant;
    try {
        (void)orifice_flow(0.5, 1.2 * p.P_S, p);
        FAIL() << "expected CavitationError";
    } catch (const CavitationError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("0.5"), std::string::npos) << what;
    }
    EXPECT_THROW((void)orifice_flow(1.5, 0.0, p), ValidationError);
}

TEST(Linearize, MatchesCentralDifferencesAtRandomPoints) {
    const auto& p = cal().plant;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uz(-1.0, 1.0);
    std::uniform_real_distribution<double> up(-0.95, 0.95);
    for (int i = 0; i < 100; ++i) {
        const double z = uz(rng);
        const double pl = up(rng) * p.P_S;
        const auto g = linearize(z, pl, p);
        const double hz = 1e-6;
        const double hp = 1e-6 * p.P_S;
        const double zl = std::max(-1.0, z - hz), zr = std::min(1.0, z + hz);
        const double dq_dz = (orifice_flow(zr, pl, p) - orifice_flow(zl, pl, p)) / (zr - zl);
        const double dq_dp = (orifice_flow(z, pl + hp, p) - orifice_flow(z, pl - hp, p)) / (2.0 * hp);
        EXPECT_LT(fixture::rel_err(g.C_q, dq_dz), 1e-6) << "z=" << z << " P_L=" << pl;
        EXPECT_LT(fixture::rel_err(g.C_qp, -dq_dp), 1e-6) << "z=" << z << " P_L=" << pl;
    }
}

TEST(Linearize, NullSpoolHasNoPressureSensitivity) {
    const auto g = linearize(0.0, 0.4e7, cal().plant);
    EXPECT_EQ(g.C_qp, 0.0);
    EXPECT_DOUBLE_EQ(g.C_q, cal().plant.K * std::sqrt(cal().plant.P_S / 2.0));
}

TEST(Linearize, RejectsOutOfRangePoints) {
    const auto& p = cal().plant;
    EXPECT_THROW(linearize(1.01, 0.0, p), ValidationError);
    EXPECT_THROW(linearize(0.2, 0.96 * p.P_S, p), ValidationError);
    EXPECT_NO_THROW(linearize(1.0, 0.95 * p.P_S, p));
}

TEST(NominalTf, ReproducesReferenceCoefficients) {
    const auto g = uncertainty::nominal_gains(cal().plant, cal().range);
    const auto P = nominal_tf(cal().plant, g, 0.03);
    ASSERT_EQ(P.numerator().size(), 1u);
    ASSERT_EQ(P.denominator().size(), 4u);
    EXPECT_LT(fixture::rel_err(P.numerator()[0], 8.255e5), 5e-3);
    EXPECT_LT(fixture::rel_err(P.denominator()[2], 948.0), 5e-3);
    EXPECT_LT(fixture::rel_err(P.denominator()[1], 2.219e6), 5e-3);
    EXPECT_EQ(P.denominator()[0], 0.0);
    EXPECT_EQ(P.denominator()[3], 1.0);
    EXPECT_EQ(P.delay(), 0.03);
}

TEST(NominalTf, AgreesWithPoleParameters) {
    const auto g = uncertainty::nominal_gains(cal().plant, cal().range);
    const auto pp = uncertainty::pole_params(g, cal().plant);
    const auto P = nominal_tf(cal().plant, g, 0.0);
    EXPECT_LT(fixture::rel_err(P.numerator()[0], pp.k * pp.omega_n * pp.omega_n), 1e-12);
    EXPECT_LT(fixture::rel_err(P.denominator()[1], pp.omega_n * pp.omega_n), 1e-12);
    EXPECT_LT(fixture::rel_err(P.denominator()[2], 2.0 * pp.xi * pp.omega_n), 1e-12);
    EXPECT_LT(fixture::rel_err(pp.k, oracle::k_nom), 1e-9);
    EXPECT_LT(fixture::rel_err(pp.omega_n, oracle::omega_n_nom), 1e-9);
    EXPECT_LT(fixture::rel_err(pp.xi, oracle::xi_nom), 1e-9);
}

TEST(Stribeck, BreakawayAndSlidingLimits) {
    const auto& f = cal().friction;
    EXPECT_EQ(stribeck_force(0.0, f), 0.0);
    EXPECT_NEAR(stribeck_force(1e-9, f), f.F_s, 1e-3);
    EXPECT_NEAR(stribeck_force(0.2, f), f.F_c + f.sigma_v * 0.2, 1e-6);
    for (double v : {1e-4, 0.01, 0.05, 0.3}) EXPECT_DOUBLE_EQ(stribeck_force(-v, f), -stribeck_force(v, f));
}

TEST(Stribeck, LinearFitMatchesCalibratedViscousCoefficient) {
    EXPECT_LT(fixture::rel_err(fit_sigma_lin(cal().friction, cal().v_max), cal().plant.sigma_lin), 1e-5);
    EXPECT_THROW(fit_sigma_lin(cal().friction, 0.0), ValidationError);
}

TEST(Valve, DeadZoneAndSaturation) {
    const ValveNonlinearity vn{0.05};
    EXPECT_EQ(apply_valve(0.0, vn), 0.0);
    EXPECT_EQ(apply_valve(0.05, vn), 0.0);
    EXPECT_EQ(apply_valve(-0.04, vn), 0.0);
    EXPECT_DOUBLE_EQ(apply_valve(1.0, vn), 1.0);
    EXPECT_DOUBLE_EQ(apply_valve(3.0, vn), 1.0);
    EXPECT_DOUBLE_EQ(apply_valve(-3.0, vn), -1.0);
    EXPECT_NEAR(apply_valve(0.525, vn), 0.5, 1e-15);
    double prev = -2.0;
    for (double u = -1.2; u <= 1.2; u += 0.001) {
        const double z = apply_valve(u, vn);
        ASSERT_GE(z, prev);
        prev = z;
    }
}

TEST(PlantStep, RestsUnderZeroCommand) {
    const auto t = cal().truth_plant();
    PlantState s{0.02, 0.0, 0.0};
    for (int k = 0; k < 2000; ++k) s = plant_step(s, 0.0, 5e-4, t);
    EXPECT_EQ(s.x, 0.02);
    EXPECT_EQ(s.v, 0.0);
    EXPECT_EQ(s.p_load, 0.0);
}

TEST(PlantStep, StictionHoldsRodWhilePressureBuilds) {
    const auto t = cal().truth_plant();
    PlantState s{};
    s = plant_step(s, 0.06, 5e-4, t);
    EXPECT_EQ(s.x, 0.0);
    EXPECT_EQ(s.v, 0.0);
    EXPECT_GT(s.p_load, 0.0);
    int steps = 1;
    while (s.x == 0.0 && steps < 20000) {
        s = plant_step(s, 0.06, 5e-4, t);
        ++steps;
    }
    EXPECT_GT(s.x, 0.0);
    EXPECT_GE(cal().plant.A_bar * s.p_load, cal().friction.F_c);
}

TEST(PlantStep, LinearizedPlantReachesSteadyVelocity) {
    const auto g = uncertainty::nominal_gains(cal().plant, cal().range);
    const auto t = TruthPlant::linearized(cal().plant, g);
    const auto pp = uncertainty::pole_params(g, cal().plant);
    PlantState s{};
    for (int k = 0; k < 4000; ++k) s = plant_step(s, 0.1, 5e-4, t);
    EXPECT_LT(fixture::rel_err(s.v, pp.k * 0.1), 1e-9);
}

TEST(PlantStep, PressureStaysInsideClamp) {
    const auto t = cal().truth_plant();
    PlantState s{0.0, 0.0, 0.0};
    const double limit = t.integration.pressure_clamp * t.params.P_S;
    for (int k = 0; k < 4000; ++k) {
        s = plant_step(s, k < 2000 ? 1.0 : -1.0, 5e-4, t);
        ASSERT_LE(std::abs(s.p_load), limit);
        ASSERT_TRUE(std::isfinite(s.x));
    }
}

TEST(PlantStep, RejectsNonPositiveStep) {
    EXPECT_THROW(plant_step({}, 0.0, 0.0, cal().truth_plant()), ValidationError);
}

TEST(PlantStep, NonFiniteStateRaisesIntegrationError) {
    const auto t = cal().truth_plant();
    try {
        (void)plant_step({0.0, NAN, 0.0}, 0.5, 5e-4, t, 1.25);
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_NEAR(e.time(), 1.2505, 1e-12);
    }
}

TEST(PlantParams, ValidationNamesTheField) {
    auto p = cal().plant;
    p.V_t = -1.0;
    try {
        p.validate();
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("V_t"), std::string::npos) << e.what();
    }
}
