#include <fstream>

#include <gtest/gtest.h>

#include "hydroloop/calibration.hpp"
#include "hydroloop/error.hpp"
#include "test_support.hpp"

using namespace hydroloop;

namespace {

nlohmann::json default_json() { return nlohmann::json::parse(fixture::read_file(fixture::default_calibration_path())); }

std::string error_of(const nlohmann::json& j) {
    try {
        (void)calibration_from_json(j);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Calibration, ShippedFileLoads) {
    const auto c = fixture::default_calibration();
    EXPECT_EQ(c.plant.P_S, 1e7);
    EXPECT_EQ(c.valve.deadzone, 0.05);
    EXPECT_EQ(c.delay.tau_nom, 0.03);
    EXPECT_EQ(c.delay.tau_max, 0.11);
    EXPECT_EQ(c.range.resolution, 401);
    EXPECT_EQ(c.plant_dt, 0.0005);
}

TEST(Calibration, MissingKeyIsNamed) {
    auto j = default_json();
    j["plant"].erase("m");
    EXPECT_NE(error_of(j).find("plant.m"), std::string::npos) << error_of(j);
    auto k = default_json();
    k.erase("friction");
    EXPECT_NE(error_of(k).find("friction"), std::string::npos);
}

TEST(Calibration, WrongTypeIsRejected) {
    auto j = default_json();
    j["plant"]["E"] = "stiff";
    EXPECT_NE(error_of(j).find("plant.E"), std::string::npos) << error_of(j);
}

TEST(Calibration, InvariantViolationIsNamed) {
    auto j = default_json();
    j["friction"]["F_s"] = 100.0;  // below F_c
    EXPECT_NE(error_of(j).find("F_s"), std::string::npos);
    auto k = default_json();
    k["delay"]["tau_nom"] = 0.2;
    EXPECT_NE(error_of(k).find("tau_nom"), std::string::npos);
}

TEST(Calibration, OptionalSectionsFallBackToDefaults) {
    auto j = default_json();
    j.erase("delay");
    j.erase("operating_range");
    j.erase("integration");
    const auto c = calibration_from_json(j);
    EXPECT_EQ(c.delay.tau_nom, 0.03);
    EXPECT_EQ(c.range.pl_hi, 0.95);
    EXPECT_EQ(c.plant_dt, 0.0005);
}

TEST(Calibration, JsonRoundTrip) {
    const auto c = fixture::default_calibration();
    const auto j = to_json(c);
    EXPECT_EQ(to_json(calibration_from_json(j)), j);
}

TEST(Calibration, ParseErrorReportsLine) {
    fixture::TempDir dir("cal");
    const auto path = dir / "bad.json";
    std::ofstream(path) << "{\n  \"plant\": {\n    \"m\": 4.0,,\n  }\n}\n";
    try {
        (void)load_calibration(path);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
}

TEST(Calibration, TruthPlantCarriesAllParts) {
    const auto c = fixture::default_calibration();
    const auto t = c.truth_plant();
    EXPECT_EQ(t.params.A_bar, c.plant.A_bar);
    EXPECT_EQ(t.valve.deadzone, c.valve.deadzone);
    EXPECT_EQ(t.friction.F_s, c.friction.F_s);
    EXPECT_EQ(t.friction_kind, plant::FrictionKind::stribeck);
    EXPECT_EQ(t.flow_kind, plant::FlowKind::orifice);
}
