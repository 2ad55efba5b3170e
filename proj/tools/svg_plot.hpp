#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nlvgsim {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Plain SVG line chart with axes, tick labels and a legend.
std::string render_svg(const Chart& chart);
void write_svg(const std::filesystem::path& file, const Chart& chart);

} // namespace nlvgsim
