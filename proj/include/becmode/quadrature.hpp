#pragma once

#include <functional>
#include <vector>

namespace becmode::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule; nodes by Newton iteration on P_n from the Chebyshev guess.
GaussLegendreRule gauss_legendre(int n);

/// Composite rule: `panels` equal sub-intervals of [a, b], each with the
/// n-point rule. Returns absolute nodes and weights.
GaussLegendreRule composite(double a, double b, int panels, int n);

/// Integral of f over [a, b] with a composite rule.
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 16, int n = 24);

}  // namespace becmode::quadrature
