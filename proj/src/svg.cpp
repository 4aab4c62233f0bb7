#include "becmode/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "becmode/errors.hpp"

namespace becmode::svg {

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target)
{
    if (!(hi > lo))
        return {lo};
    const double raw = (hi - lo) / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw)
            break;
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

std::string render(const Plot& plot)
{
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& l : plot.lines) {
        if (l.x.size() != l.y.size())
            throw ParameterError(fmt::format("line '{}' has mismatched x and y lengths", l.label));
        for (std::size_t i = 0; i < l.x.size(); ++i) {
            if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i]))
                continue;
            xmin = std::min(xmin, l.x[i]);
            xmax = std::max(xmax, l.x[i]);
            ymin = std::min(ymin, l.y[i]);
            ymax = std::max(ymax, l.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if (plot.y_range) {
        ymin = plot.y_range->first;
        ymax = plot.y_range->second;
    }
    if (xmax == xmin)
        xmax = xmin + 1.0;
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    const double left = 70.0;
    const double right = 20.0;
    const double top = 40.0;
    const double bottom = 55.0;
    const double pw = plot.width - left - right;
    const double ph = plot.height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        plot.width, plot.height);
    s += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", plot.width / 2,
                     escape(plot.title));
    s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                     "stroke=\"black\"/>\n",
                     left, top, pw, ph);
    for (double t : nice_ticks(xmin, xmax)) {
        const double x = px(t);
        s += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>\n", x,
                         top + ph, top + ph + 5);
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:g}</text>\n", x, top + ph + 18, t);
    }
    for (double t : nice_ticks(ymin, ymax)) {
        const double y = py(t);
        s += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\"/>\n",
                         left - 5, y, left);
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:g}</text>\n", left - 8, y + 4, t);
    }
    s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                     plot.height - 12, escape(plot.x_label));
    s += fmt::format("<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}"
                     "</text>\n",
                     top + ph / 2, top + ph / 2, escape(plot.y_label));

    for (const auto& l : plot.lines) {
        std::string pts;
        for (std::size_t i = 0; i < l.x.size(); ++i) {
            if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i]))
                continue;
            const double y = std::clamp(l.y[i], ymin, ymax);
            pts += fmt::format("{:.2f},{:.2f} ", px(l.x[i]), py(y));
        }
        s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>\n",
                         escape(l.color), l.dashed ? " stroke-dasharray=\"6 4\"" : "", pts);
    }
    double ly = top + 16;
    for (const auto& l : plot.lines) {
        const double lx = left + pw - 150;
        s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" "
                         "stroke-width=\"1.5\"{}/>\n",
                         lx, ly, lx + 30, ly, escape(l.color), l.dashed ? " stroke-dasharray=\"6 4\"" : "");
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", lx + 36, ly + 4, escape(l.label));
        ly += 18;
    }
    s += "</svg>\n";
    return s;
}

}  // namespace becmode::svg
