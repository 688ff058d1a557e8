#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "hydroloop/plant.hpp"
#include "hydroloop/uncertainty.hpp"

namespace hydroloop {

struct DelayBounds {
    double tau_nom = 0.03;  // [s]
    double tau_max = 0.11;  // [s]
};

/// Contents of a calibration file. Sections plant, valve and friction are
/// required; delay, operating_range and integration fall back to defaults.
struct Calibration {
    plant::PlantParams plant{};
    plant::ValveNonlinearity valve{};
    plant::StribeckParams friction{};
    double v_max = 0.25;  // [m/s]
    DelayBounds delay{};
    uncertainty::OperatingRange range{};
    plant::IntegrationConfig integration{};
    double plant_dt = 0.0005;  // [s]

    void validate() const;
    plant::TruthPlant truth_plant() const;
};

Calibration calibration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Calibration& c);
Calibration load_calibration(const std::filesystem::path& path);

}  // namespace hydroloop
