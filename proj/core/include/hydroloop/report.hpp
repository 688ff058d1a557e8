#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydroloop/calibration.hpp"
#include "hydroloop/synthesis.hpp"
#include "hydroloop/twodof.hpp"
#include "hydroloop/uncertainty.hpp"

namespace hydroloop {

struct LinearizationSection {
    plant::LinearizationGains nominal{0.0, 0.0};
    uncertainty::PoleParams poles{0.0, 0.0, 0.0};
    std::vector<double> numerator;    // ascending powers of s
    std::vector<double> denominator;
    double delay = 0.0;
    uncertainty::DeviationReport deviation{};

    lti::TransferFunction plant() const { return {numerator, denominator, delay}; }
};

struct SynthesisSection {
    double M_s = 1.1;
    synthesis::PidGains gains{};
    double min_f = 0.0;
    double min_omega = 0.0;
    double achieved_M_s = 0.0;
    std::vector<synthesis::ConstraintPoint> tangencies;
};

struct RobustSection {
    double k_ratio_max = 1.0;
    double tau_max = 0.11;
    uncertainty::LeadWeight weight{1.0, 1.0, 1.0, 2.0, 1.0};
    double margin = 0.0;
    double margin_omega = 0.0;
    bool robust = false;
};

struct ControllerSection {
    twodof::TwoDofConfig config{};
    twodof::SetpointFilter setpoint{};
};

/// Single cumulative document written stage by stage by the command-line tool.
struct DesignReport {
    Calibration calibration{};
    std::optional<LinearizationSection> linearization;
    std::optional<uncertainty::GammaFit> rtt;
    std::optional<SynthesisSection> synthesis;
    std::optional<RobustSection> robust;
    std::optional<ControllerSection> controller;

    // Empty when the stored plant matches calibration + nominal gains (1e-9
    // relative), else a description of the mismatch.
    std::string consistency_error() const;
};

nlohmann::json to_json(const DesignReport& r);
DesignReport report_from_json(const nlohmann::json& j);
DesignReport load_report(const std::filesystem::path& path);
void save_report(const DesignReport& r, const std::filesystem::path& path);
std::string dump_report(const DesignReport& r);

}  // namespace hydroloop
