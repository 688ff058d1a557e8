#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "hydroloop/calibration.hpp"
#include "hydroloop/lti.hpp"
#include "hydroloop/synthesis.hpp"

namespace hydroloop::fixture {

inline std::filesystem::path data_dir() { return HYDROLOOP_TEST_DATA_DIR; }
inline std::filesystem::path default_calibration_path() { return data_dir() / "default_calibration.json"; }
inline std::filesystem::path scenario_path(const std::string& name) { return data_dir() / "scenarios" / (name + ".json"); }

inline Calibration default_calibration() { return load_calibration(default_calibration_path()); }

// 8.255e5 e^{-0.03 s} / (s (s^2 + 948 s + 2.219e6))
inline lti::TransferFunction reference_plant() {
    return lti::TransferFunction({8.255e5}, {0.0, 2.219e6, 948.0, 1.0}, 0.03);
}

inline synthesis::PidGains reference_gains() { return {12.7534, 31.1783, 0.1472}; }
inline synthesis::PidGains tuned_gains() { return {12.75242, 31.17574, 0.147171}; }

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("hydroloop_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace hydroloop::fixture
