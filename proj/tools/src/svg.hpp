#pragma once

#include <string>
#include <vector>

namespace hydroloop::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool right_axis = false;
    bool bars = false;  // draw as histogram bars centred on x
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string y2_label;  // only drawn when a series uses the right axis
    std::vector<Series> series;
};

// Self-contained SVG document; deterministic for identical input.
std::string render_svg(const Plot& plot, int width = 900, int height = 420);

}  // namespace hydroloop::cli
