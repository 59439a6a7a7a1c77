#pragma once

#include <string>
#include <vector>

namespace odegen::svg {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
};

enum class PlotKind { scatter, line };

// Minimal self-contained SVG renderer; non-finite points are skipped.
std::string render(const std::vector<Series>& series, PlotKind kind,
                   const std::string& title, const std::string& x_label,
                   const std::string& y_label, int width = 640, int height = 480);

}  // namespace odegen::svg
