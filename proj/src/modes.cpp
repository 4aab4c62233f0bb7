#include "becmode/modes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>

#include <fmt/format.h>

#include "becmode/errors.hpp"
#include "becmode/units.hpp"

namespace becmode::modes {

namespace {

using units::kPi;

const double kGaussianQuartic = 1.0 / std::pow(2.0 * kPi, 1.5);  // (2 pi)^{-3/2}

// Per-mode constants of the closed forms:
//   KE = c_r u/2 + c_z v/2,  PE = c_r/(2u) + c_z lambda^2/(2v),
//   int |psi|^4 = kappa u sqrt(v) / (2 pi)^{3/2}.
struct ShapeConstants {
    double c_r;
    double c_z;
    double kappa;
};

ShapeConstants shape_constants(ModeIndex index)
{
    if (index == kGround)
        return {1.0, 0.5, 1.0};
    if (index == kRadialDipole)
        return {3.0, 0.5, 0.5};
    if (index == kVortex)
        return {2.0, 0.5, 0.5};
    if (index == kAxialDipole)
        return {1.0, 1.5, 0.75};
    throw UnsupportedModeError(fmt::format(
        "mode {{{}}} is not supported; available: 000, 100, 010, 001", index.label()));
}

double weight(OptimizationCondition condition)
{
    return condition == OptimizationCondition::EigenvalueStationary ? 1.0 : 0.5;
}

struct Hessian {
    double uu;
    double uv;
    double vv;
};

Hessian functional_hessian(const ShapeConstants& c, double u, double v, double g0, double lambda,
                           double w)
{
    const double s = w * g0 * c.kappa * kGaussianQuartic;
    return {c.c_r / (u * u * u), s / (2.0 * std::sqrt(v)),
            c.c_z * lambda * lambda / (v * v * v) - s * u / (4.0 * v * std::sqrt(v))};
}

double norm2(const std::array<double, 2>& g)
{
    return std::hypot(g[0], g[1]);
}

// Root of f on (lo, hi) given a sign change; plain bisection.
std::optional<double> bisect(const auto& f, double lo, double hi)
{
    double flo = f(lo);
    const double fhi = f(hi);
    if (!(flo < 0.0 && fhi >= 0.0))
        return std::nullopt;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-16 * hi)
            break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::string ModeIndex::label() const
{
    return fmt::format("{}{}{}", n, m, k);
}

bool ModeIndex::supported() const
{
    return *this == kGround || *this == kRadialDipole || *this == kVortex || *this == kAxialDipole;
}

ModeIndex ModeIndex::parse(std::string_view text)
{
    if (text.size() != 3 || !std::isdigit(static_cast<unsigned char>(text[0])) ||
        !std::isdigit(static_cast<unsigned char>(text[1])) ||
        !std::isdigit(static_cast<unsigned char>(text[2])))
        throw ParameterError(fmt::format("mode label '{}' must be three digits nmk, e.g. 100", text));
    return {text[0] - '0', text[1] - '0', text[2] - '0'};
}

EnergyTerms energy_terms(ModeIndex index, double u, double v, double lambda)
{
    const ShapeConstants c = shape_constants(index);
    return {0.5 * (c.c_r * u + c.c_z * v), 0.5 * (c.c_r / u + c.c_z * lambda * lambda / v),
            c.kappa * u * std::sqrt(v) * kGaussianQuartic};
}

double optimized_functional(ModeIndex index, double u, double v, double g0, double lambda,
                            OptimizationCondition condition)
{
    const EnergyTerms e = energy_terms(index, u, v, lambda);
    return e.kinetic + e.trap + weight(condition) * g0 * e.quartic;
}

std::array<double, 2> functional_gradient(ModeIndex index, double u, double v, double g0,
                                          double lambda, OptimizationCondition condition)
{
    const ShapeConstants c = shape_constants(index);
    const double s = weight(condition) * g0 * c.kappa * kGaussianQuartic;
    return {0.5 * c.c_r * (1.0 - 1.0 / (u * u)) + s * std::sqrt(v),
            0.5 * c.c_z * (1.0 - lambda * lambda / (v * v)) + s * u / (2.0 * std::sqrt(v))};
}

std::complex<double> mode_function(const ModeSolution& sol, double x_r, double phi, double x_z)
{
    if (x_r < 0.0)
        throw ParameterError("mode_function needs x_r >= 0");
    const double u = sol.u;
    const double v = sol.v;
    const double gauss = std::exp(-0.5 * (sol.exponent_u * x_r * x_r + sol.exponent_v * x_z * x_z));
    const double pi3 = kPi * kPi * kPi;
    const ModeIndex idx = sol.index;
    if (idx == kGround)
        return std::pow(u * u * v / pi3, 0.25) * gauss;
    if (idx == kRadialDipole)
        return std::pow(u * u * v / pi3, 0.25) * (u * x_r * x_r - 1.0) * gauss;
    if (idx == kVortex)
        return u * std::pow(v / pi3, 0.25) * x_r * gauss * std::polar(1.0, phi);
    if (idx == kAxialDipole)
        return std::pow(4.0 * u * u * v * v * v / pi3, 0.25) * x_z * gauss;
    throw UnsupportedModeError(fmt::format("mode {{{}}} is not supported", idx.label()));
}

ModeSolution solve_mode(ModeIndex index, double g0, double lambda, const SolveOptions& options)
{
    const ShapeConstants c = shape_constants(index);
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ParameterError(fmt::format("lambda must be positive (got {})", lambda));
    if (!std::isfinite(g0))
        throw ParameterError("g0 must be finite");

    const double w = weight(options.condition);
    auto grad = [&](double u, double v) {
        return functional_gradient(index, u, v, g0, lambda, options.condition);
    };

    double u = 1.0;
    double v = lambda;
    auto g = grad(u, v);
    double gn = norm2(g);
    int iterations = 0;

    // Damped Newton on the gradient with step halving; false when a step
    // cannot reduce |grad|.
    auto newton = [&](int budget) {
        for (int it = 0; it < budget && gn > options.tolerance; ++it) {
            ++iterations;
            const Hessian h = functional_hessian(c, u, v, g0, lambda, w);
            const double det = h.uu * h.vv - h.uv * h.uv;
            if (det == 0.0 || !std::isfinite(det))
                return false;
            const double du = -(h.vv * g[0] - h.uv * g[1]) / det;
            const double dv = -(h.uu * g[1] - h.uv * g[0]) / det;
            double t = 1.0;
            bool accepted = false;
            while (t > 1e-12) {
                const double un = u + t * du;
                const double vn = v + t * dv;
                if (un > 0.0 && vn > 0.0) {
                    const auto gnew = grad(un, vn);
                    const double nn = norm2(gnew);
                    if (nn < gn) {
                        u = un;
                        v = vn;
                        g = gnew;
                        gn = nn;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if (!accepted)
                return false;
        }
        return gn <= options.tolerance;
    };

    const int first_budget = std::min(options.max_iterations, 40);
    if (!newton(first_budget)) {
        // Bracketing fallback. For fixed v the radial condition is solved
        // exactly by u(v) = (1 + 2 s sqrt(v) / c_r)^{-1/2}; the axial
        // condition along that curve is then bracketed on a log grid in v
        // and bisected.
        const double s = w * g0 * c.kappa * kGaussianQuartic;
        auto u_of = [&](double vv) {
            const double q = 1.0 + 2.0 * s * std::sqrt(vv) / c.c_r;
            return q > 0.0 ? 1.0 / std::sqrt(q) : std::nan("");
        };
        auto f = [&](double vv) {
            const double uu = u_of(vv);
            return std::isfinite(uu) ? grad(uu, vv)[1] : std::nan("");
        };
        std::optional<double> root;
        double prev_v = 1e-10;
        double prev_f = f(prev_v);
        for (int i = 1; i <= 400 && !root; ++i) {
            const double vv = 1e-10 * std::pow(10.0, 16.0 * i / 400.0);
            const double fv = f(vv);
            if (std::isfinite(prev_f) && std::isfinite(fv) && prev_f < 0.0 && fv >= 0.0)
                root = bisect(f, prev_v, vv);
            prev_v = vv;
            prev_f = fv;
            ++iterations;
        }
        if (root) {
            v = *root;
            u = u_of(v);
            g = grad(u, v);
            gn = norm2(g);
            newton(options.max_iterations);
        }
    }

    if (!(gn <= options.tolerance) || !std::isfinite(u) || !std::isfinite(v))
        throw ConvergenceError(fmt::format(
            "mode {{{}}} at g0 = {}, lambda = {}: no stationary widths after {} iterations "
            "(last iterate u = {:.12g}, v = {:.12g}, |grad| = {:.3g})",
            index.label(), g0, lambda, iterations, u, v, gn));

    ModeSolution sol;
    sol.index = index;
    sol.u = u;
    sol.v = v;
    sol.exponent_u = u;
    sol.exponent_v = v;
    sol.g0 = g0;
    sol.lambda = lambda;
    sol.condition = options.condition;
    sol.iterations = iterations;
    sol.gradient_norm = gn;
    const EnergyTerms e = energy_terms(index, u, v, lambda);
    sol.energy = e.kinetic + e.trap + g0 * e.quartic;
    sol.functional_value = e.kinetic + e.trap + 0.5 * g0 * e.quartic;
    if (g0 < 0.0)
        sol.warnings.push_back("attractive coupling (g0 < 0): collapse is not modeled");
    return sol;
}

ModePair transition_frequency(double g0, double lambda, ModeIndex excited, const SolveOptions& options)
{
    if (excited == kGround)
        throw ParameterError("the excited mode must differ from {000}");
    ModePair pair;
    pair.ground = solve_mode(kGround, g0, lambda, options);
    pair.excited = solve_mode(excited, g0, lambda, options);
    pair.omega_p0 = pair.excited.energy - pair.ground.energy;
    return pair;
}

ModeSolution with_shared_ground_exponents(const ModeSolution& excited, const ModeSolution& ground)
{
    if (ground.index != kGround)
        throw ParameterError("shared exponents must come from the {000} solution");
    ModeSolution out = excited;
    out.exponent_u = ground.u;
    out.exponent_v = ground.v;
    out.warnings.push_back("shared ground-state exponents: normalization is not exact");
    return out;
}

}  // namespace becmode::modes
