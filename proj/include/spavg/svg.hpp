#pragma once

#include <string>
#include <vector>

namespace spavg {

struct PlotSeries {
    std::string label;
    std::vector<double> y;
    std::string color;
};

/// Line plot: one polyline per series over shared abscissae, with axes, tick
/// labels and a legend. Output is a standalone SVG document.
[[nodiscard]] std::string svg_line_plot(const std::string& title, const std::string& x_label,
                                        const std::string& y_label, const std::vector<double>& x,
                                        const std::vector<PlotSeries>& series);

}  // namespace spavg
