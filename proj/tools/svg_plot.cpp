#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace nlvgsim {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo{std::numeric_limits<double>::infinity()};
    double hi{-std::numeric_limits<double>::infinity()};

    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void settle() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

} // namespace

std::string render_svg(const Chart& chart) {
    Range rx, ry;
    for (const auto& s : chart.series) {
        for (double v : s.x) rx.add(v);
        for (double v : s.y) ry.add(v);
    }
    rx.settle();
    ry.settle();
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double v) { return kTop + (1.0 - (v - ry.lo) / (ry.hi - ry.lo)) * ph; };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                      num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
           escape(chart.title) + "</text>\n";
    svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 5.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 5.0;
        svg += "<line x1=\"" + num(px(fx)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px(fx)) + "\" y2=\"" +
               num(kTop + ph) + "\" stroke=\"#ddd\"/>\n";
        svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(fy)) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
               num(py(fy)) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
               tick(fx) + "</text>\n";
        svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(fy) + 4) + "\" text-anchor=\"end\">" + tick(fy) +
               "</text>\n";
    }
    svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 10) + "\" text-anchor=\"middle\">" +
           escape(chart.x_label) + "</text>\n";
    svg += "<text transform=\"translate(16," + num(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
           escape(chart.y_label) + "</text>\n";

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = kColors[k % std::size(kColors)];
        std::string points;
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                points += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
            }
        }
        svg += std::string("<polyline fill=\"none\" stroke=\"") + color + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
        svg += std::string("<line x1=\"") + num(kWidth - kRight + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" +
               num(kWidth - kRight + 36) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(kWidth - kRight + 42) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.label) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_svg(const std::filesystem::path& file, const Chart& chart) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + file.string());
    }
    out << render_svg(chart);
}

} // namespace nlvgsim
