#include "hydroloop/calibration.hpp"

#include "hydroloop/error.hpp"
#include "json_access.hpp"

namespace hydroloop {

using detail::number_or;
using detail::require;
using detail::require_number;

void Calibration::validate() const {
    plant.validate();
    valve.validate();
    friction.validate();
    range.validate();
    if (!(v_max > 0.0)) throw ValidationError("friction.v_max must be > 0");
    if (!(delay.tau_nom >= 0.0) || !(delay.tau_max >= delay.tau_nom))
        throw ValidationError("delay: require 0 <= tau_nom <= tau_max");
    if (!(plant_dt > 0.0)) throw ValidationError("integration.plant_dt must be > 0");
    if (!(integration.stiction_velocity >= 0.0)) throw ValidationError("integration.stiction_velocity must be >= 0");
    if (!(integration.pressure_clamp > 0.0 && integration.pressure_clamp <= 1.0))
        throw ValidationError("integration.pressure_clamp must lie in (0, 1]");
}

plant::TruthPlant Calibration::truth_plant() const {
    plant::TruthPlant t;
    t.params = plant;
    t.valve = valve;
    t.friction = friction;
    t.integration = integration;
    return t;
}

Calibration calibration_from_json(const nlohmann::json& j) {
    Calibration c;
    const auto& p = require(j, "", "plant");
    c.plant = {require_number(p, "plant", "m"),   require_number(p, "plant", "sigma_lin"),
               require_number(p, "plant", "V_t"), require_number(p, "plant", "E"),
               require_number(p, "plant", "A_bar"), require_number(p, "plant", "K"),
               require_number(p, "plant", "P_S")};
    c.valve.deadzone = require_number(require(j, "", "valve"), "valve", "deadzone");
    const auto& f = require(j, "", "friction");
    c.friction = {require_number(f, "friction", "F_c"), require_number(f, "friction", "F_s"),
                  require_number(f, "friction", "v_s"), require_number(f, "friction", "delta"),
                  require_number(f, "friction", "sigma_v")};
    c.v_max = number_or(f, "v_max", c.v_max);

    if (const auto it = j.find("delay"); it != j.end()) {
        c.delay.tau_nom = number_or(*it, "tau_nom", c.delay.tau_nom);
        c.delay.tau_max = number_or(*it, "tau_max", c.delay.tau_max);
    }
    if (const auto it = j.find("operating_range"); it != j.end()) {
        const double frac = number_or(*it, "pl_fraction", c.range.pl_hi);
        c.range.pl_lo = -frac;
        c.range.pl_hi = frac;
        c.range.z_lo = number_or(*it, "z_lo", c.range.z_lo);
        c.range.z_hi = number_or(*it, "z_hi", c.range.z_hi);
        c.range.resolution = static_cast<int>(number_or(*it, "resolution", c.range.resolution));
    }
    if (const auto it = j.find("integration"); it != j.end()) {
        c.plant_dt = number_or(*it, "plant_dt", c.plant_dt);
        c.integration.stiction_velocity = number_or(*it, "stiction_velocity", c.integration.stiction_velocity);
        c.integration.pressure_clamp = number_or(*it, "pressure_clamp", c.integration.pressure_clamp);
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const Calibration& c) {
    return {
        {"plant",
         {{"m", c.plant.m},
          {"sigma_lin", c.plant.sigma_lin},
          {"V_t", c.plant.V_t},
          {"E", c.plant.E},
          {"A_bar", c.plant.A_bar},
          {"K", c.plant.K},
          {"P_S", c.plant.P_S}}},
        {"valve", {{"deadzone", c.valve.deadzone}}},
        {"friction",
         {{"F_c", c.friction.F_c},
          {"F_s", c.friction.F_s},
          {"v_s", c.friction.v_s},
          {"delta", c.friction.delta},
          {"sigma_v", c.friction.sigma_v},
          {"v_max", c.v_max}}},
        {"delay", {{"tau_nom", c.delay.tau_nom}, {"tau_max", c.delay.tau_max}}},
        {"operating_range",
         {{"pl_fraction", c.range.pl_hi},
          {"z_lo", c.range.z_lo},
          {"z_hi", c.range.z_hi},
          {"resolution", c.range.resolution}}},
        {"integration",
         {{"plant_dt", c.plant_dt},
          {"stiction_velocity", c.integration.stiction_velocity},
          {"pressure_clamp", c.integration.pressure_clamp}}},
    };
}

Calibration load_calibration(const std::filesystem::path& path) {
    return calibration_from_json(detail::read_json_file(path));
}

}  // namespace hydroloop
