#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace hydroloop::cli {

namespace {

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            lo -= 0.5 * std::max(1e-9, std::abs(lo));
            hi += 0.5 * std::max(1e-9, std::abs(hi));
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::vector<double> nice_ticks(double lo, double hi) {
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
    return t;
}

}  // namespace

std::string render_svg(const Plot& plot, int width, int height) {
    const double left = 80, right = 80, top = 40, bottom = 60;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    Range xr, yl, yr;
    bool has_right = false;
    for (const auto& s : plot.series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) (s.right_axis ? yr : yl).add(v);
        if (s.bars) yl.add(0.0);
        has_right = has_right || s.right_axis;
    }
    xr.settle();
    yl.settle();
    yr.settle();

    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y, const Range& r) { return top + (r.hi - y) / (r.hi - r.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
      << "</text>\n";
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : nice_ticks(xr.lo, xr.hi)) {
        o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(t)) << "\" y2=\""
          << num(top + ph) << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(yl.lo, yl.hi)) {
        o << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(t, yl)) << "\" x2=\"" << num(left + pw)
          << "\" y2=\"" << num(py(t, yl)) << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t, yl) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t) << "</text>\n";
    }
    if (has_right)
        for (double t : nice_ticks(yr.lo, yr.hi))
            o << "<text x=\"" << num(left + pw + 6) << "\" y=\"" << num(py(t, yr) + 4) << "\">" << tick_label(t)
              << "</text>\n";

    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << escape(plot.x_label) << "</text>\n";
    o << "<text transform=\"translate(18," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(plot.y_label) << "</text>\n";
    if (has_right)
        o << "<text transform=\"translate(" << width - 14 << "," << num(top + ph / 2)
          << ") rotate(90)\" text-anchor=\"middle\">" << escape(plot.y2_label) << "</text>\n";

    for (const auto& s : plot.series) {
        const Range& r = s.right_axis ? yr : yl;
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.bars) {
            const double w = n > 1 ? std::abs(px(s.x[1]) - px(s.x[0])) * 0.9 : 8.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double y0 = py(0.0, r), y1 = py(s.y[i], r);
                o << "<rect x=\"" << num(px(s.x[i]) - w / 2) << "\" y=\"" << num(std::min(y0, y1)) << "\" width=\""
                  << num(w) << "\" height=\"" << num(std::abs(y0 - y1)) << "\" fill=\"" << s.color
                  << "\" fill-opacity=\"0.5\"/>\n";
            }
            continue;
        }
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.3\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(s.y[i])) continue;
            o << num(px(s.x[i])) << ',' << num(py(s.y[i], r)) << (i + 1 < n ? " " : "");
        }
        o << "\"/>\n";
    }

    double ly = top + 14;
    for (const auto& s : plot.series) {
        o << "<rect x=\"" << num(left + 10) << "\" y=\"" << num(ly - 9) << "\" width=\"14\" height=\"4\" fill=\""
          << s.color << "\"/>\n";
        o << "<text x=\"" << num(left + 30) << "\" y=\"" << num(ly - 4) << "\">" << escape(s.label) << "</text>\n";
        ly += 16;
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace hydroloop::cli
