#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace becmode::svg {

struct Line {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
    std::string color = "#1f3b73";
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Line> lines;
    std::optional<std::pair<double, double>> y_range;
    int width = 720;
    int height = 440;
};

/// Axes with ticks, the lines as polylines, and a legend.
std::string render(const Plot& plot);

/// 1-2-5 tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace becmode::svg
