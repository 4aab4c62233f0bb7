#include "becmode/quadrature.hpp"

#include <cmath>

#include "becmode/errors.hpp"
#include "becmode/units.hpp"

namespace becmode::quadrature {

GaussLegendreRule gauss_legendre(int n)
{
    if (n < 1)
        throw ParameterError("Gauss-Legendre rule needs at least one node");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(units::kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

GaussLegendreRule composite(double a, double b, int panels, int n)
{
    if (panels < 1)
        throw ParameterError("composite rule needs at least one panel");
    const GaussLegendreRule base = gauss_legendre(n);
    GaussLegendreRule out;
    out.nodes.reserve(static_cast<std::size_t>(panels) * n);
    out.weights.reserve(static_cast<std::size_t>(panels) * n);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int i = 0; i < n; ++i) {
            out.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
            out.weights.push_back(0.5 * h * base.weights[i]);
        }
    }
    return out;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int n)
{
    const GaussLegendreRule rule = composite(a, b, panels, n);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(rule.nodes[i]);
    return sum;
}

}  // namespace becmode::quadrature
