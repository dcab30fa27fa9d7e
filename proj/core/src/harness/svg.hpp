#pragma once

#include <string>
#include <vector>

namespace rve::harness {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

// Polyline plot with axes, ticks and a legend. Non-finite points (and
// non-positive ones on log axes) are dropped.
std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace rve::harness
