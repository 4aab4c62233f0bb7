#include "becmode/overlaps.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "becmode/errors.hpp"
#include "becmode/quadrature.hpp"
#include "becmode/units.hpp"

namespace becmode::overlaps {

namespace {

using modes::ModeIndex;
using modes::ModeSolution;
using units::kPi;
using units::kTwoPi;

struct Term {
    double coef;
    int pr;
    int pz;
};

// psi = norm * sum(coef x_r^pr x_z^pz) * e^{i m phi} * exp(-(alpha x_r^2 + beta x_z^2)/2)
struct Shape {
    double norm = 1.0;
    std::vector<Term> poly;
    int m = 0;
    double alpha = 1.0;
    double beta = 1.0;
};

Shape shape_of(const ModeSolution& s)
{
    const double u = s.u;
    const double v = s.v;
    const double pi3 = kPi * kPi * kPi;
    Shape sh;
    sh.alpha = s.exponent_u;
    sh.beta = s.exponent_v;
    const ModeIndex idx = s.index;
    if (idx == modes::kGround) {
        sh.norm = std::pow(u * u * v / pi3, 0.25);
        sh.poly = {{1.0, 0, 0}};
    } else if (idx == modes::kRadialDipole) {
        sh.norm = std::pow(u * u * v / pi3, 0.25);
        sh.poly = {{u, 2, 0}, {-1.0, 0, 0}};
    } else if (idx == modes::kVortex) {
        sh.norm = u * std::pow(v / pi3, 0.25);
        sh.poly = {{1.0, 1, 0}};
        sh.m = 1;
    } else if (idx == modes::kAxialDipole) {
        sh.norm = std::pow(4.0 * u * u * v * v * v / pi3, 0.25);
        sh.poly = {{1.0, 0, 1}};
    } else {
        throw UnsupportedModeError(fmt::format("mode {{{}}} is not supported", idx.label()));
    }
    return sh;
}

std::vector<Term> multiply(const std::vector<Term>& a, const std::vector<Term>& b)
{
    std::vector<Term> out;
    out.reserve(a.size() * b.size());
    for (const Term& x : a)
        for (const Term& y : b)
            out.push_back({x.coef * y.coef, x.pr + y.pr, x.pz + y.pz});
    return out;
}

// int_0^inf r^p e^{-a r^2} r dr
double radial_moment(int p, double a)
{
    const double s = 0.5 * p + 1.0;
    return std::tgamma(s) / (2.0 * std::pow(a, s));
}

// int_R z^q e^{-b z^2} dz
double axial_moment(int q, double b)
{
    if (q % 2 != 0)
        return 0.0;
    const double s = 0.5 * (q + 1);
    return std::tgamma(s) / std::pow(b, s);
}

void check_consistent(const ModeSolution& a, const ModeSolution& b)
{
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
    if (!close(a.g0, b.g0) || !close(a.lambda, b.lambda))
        throw InconsistentModeError(fmt::format(
            "modes {{{}}} (g0 = {}, lambda = {}) and {{{}}} (g0 = {}, lambda = {}) were solved at "
            "different parameters",
            a.index.label(), a.g0, a.lambda, b.index.label(), b.g0, b.lambda));
}

// Closed-form int conj(prod of `conj`) * prod of `plain` over R^3; Gaussians
// and polynomials multiply, phases cancel or the phi integral vanishes.
double gaussian_integral(const std::vector<const Shape*>& conj, const std::vector<const Shape*>& plain)
{
    int m = 0;
    double norm = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<Term> poly{{1.0, 0, 0}};
    for (const Shape* s : conj) {
        m -= s->m;
        norm *= s->norm;
        alpha += 0.5 * s->alpha;
        beta += 0.5 * s->beta;
        poly = multiply(poly, s->poly);
    }
    for (const Shape* s : plain) {
        m += s->m;
        norm *= s->norm;
        alpha += 0.5 * s->alpha;
        beta += 0.5 * s->beta;
        poly = multiply(poly, s->poly);
    }
    if (m != 0)
        return 0.0;
    double sum = 0.0;
    for (const Term& t : poly)
        sum += t.coef * radial_moment(t.pr, alpha) * axial_moment(t.pz, beta);
    return kTwoPi * norm * sum;
}

// Tensor rule over (x_r, phi, x_z). `f` gets the mode values at each node
// and returns the integrand contributions, accumulated with the volume weight.
template <std::size_t N, class F>
std::array<Complex, N> integrate_nodes(const std::vector<const ModeSolution*>& ms, double alpha_tot,
                                       double beta_tot, const QuadratureOptions& opts, F&& f)
{
    if (opts.panels < 1 || opts.order < 1 || opts.phi_points < 1 || !(opts.tail > 0.0 && opts.tail < 1.0))
        throw ParameterError("invalid quadrature options");
    const double span = 2.0 * std::log(1.0 / opts.tail);
    const double r_max = std::sqrt(span / alpha_tot);
    const double z_max = std::sqrt(span / beta_tot);
    const auto rr = quadrature::composite(0.0, r_max, opts.panels, opts.order);
    const auto zz = quadrature::composite(-z_max, z_max, opts.panels, opts.order);
    const double wphi = kTwoPi / opts.phi_points;

    std::array<Complex, N> acc{};
    std::vector<Complex> vals(ms.size());
    for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
        const double r = rr.nodes[i];
        std::array<Complex, N> row{};
        for (int a = 0; a < opts.phi_points; ++a) {
            const double phi = wphi * a;
            for (std::size_t j = 0; j < zz.nodes.size(); ++j) {
                for (std::size_t q = 0; q < ms.size(); ++q)
                    vals[q] = modes::mode_function(*ms[q], r, phi, zz.nodes[j]);
                const std::array<Complex, N> c = f(vals);
                for (std::size_t n = 0; n < N; ++n)
                    row[n] += zz.weights[j] * c[n];
            }
        }
        for (std::size_t n = 0; n < N; ++n)
            acc[n] += rr.weights[i] * r * wphi * row[n];
    }
    return acc;
}

double min_exponent_u(const std::vector<const ModeSolution*>& ms)
{
    double a = ms.front()->exponent_u;
    for (const auto* m : ms)
        a = std::min(a, m->exponent_u);
    return a;
}

double min_exponent_v(const std::vector<const ModeSolution*>& ms)
{
    double b = ms.front()->exponent_v;
    for (const auto* m : ms)
        b = std::min(b, m->exponent_v);
    return b;
}

}  // namespace

double OverlapTable::max_abs() const
{
    return std::max({std::abs(I_000), std::abs(I_ppp), std::abs(I_0p0), std::abs(I_p0p), max_abs_drive()});
}

double OverlapTable::max_abs_drive() const
{
    return std::max({std::abs(I_00p), std::abs(I_p00), std::abs(I_0pp), std::abs(I_pp0)});
}

Complex overlap_integral(const ModeSolution& j, const ModeSolution& k, const ModeSolution& l)
{
    check_consistent(j, k);
    check_consistent(j, l);
    const Shape sj = shape_of(j);
    const Shape sk = shape_of(k);
    const Shape sl = shape_of(l);
    return gaussian_integral({&sj, &sk}, {&sk, &sl});
}

Complex overlap_integral_quadrature(const ModeSolution& j, const ModeSolution& k, const ModeSolution& l,
                                    const QuadratureOptions& opts)
{
    check_consistent(j, k);
    check_consistent(j, l);
    const std::vector<const ModeSolution*> ms{&j, &k, &l};
    const auto acc = integrate_nodes<1>(ms, 2.0 * min_exponent_u(ms), 2.0 * min_exponent_v(ms), opts,
                                        [](const std::vector<Complex>& p) {
                                            return std::array<Complex, 1>{std::conj(p[0]) * std::norm(p[1]) * p[2]};
                                        });
    return acc[0];
}

Complex inner_product(const ModeSolution& a, const ModeSolution& b)
{
    check_consistent(a, b);
    const Shape sa = shape_of(a);
    const Shape sb = shape_of(b);
    return gaussian_integral({&sa}, {&sb});
}

Complex inner_product_quadrature(const ModeSolution& a, const ModeSolution& b, const QuadratureOptions& opts)
{
    check_consistent(a, b);
    const std::vector<const ModeSolution*> ms{&a, &b};
    const auto acc = integrate_nodes<1>(ms, min_exponent_u(ms), min_exponent_v(ms), opts,
                                        [](const std::vector<Complex>& p) {
                                            return std::array<Complex, 1>{std::conj(p[0]) * p[1]};
                                        });
    return acc[0];
}

OverlapTable build_table(const modes::ModePair& pair, Method method, const QuadratureOptions& opts)
{
    const ModeSolution& g = pair.ground;
    const ModeSolution& p = pair.excited;
    check_consistent(g, p);
    OverlapTable t;
    t.ground = g.index;
    t.excited = p.index;
    t.g0 = g.g0;
    t.lambda = g.lambda;
    if (method == Method::ClosedForm) {
        t.I_000 = overlap_integral(g, g, g);
        t.I_ppp = overlap_integral(p, p, p);
        t.I_0p0 = overlap_integral(g, p, g);
        t.I_00p = overlap_integral(g, g, p);
        t.I_0pp = overlap_integral(g, p, p);
        // I_{j,k,l} = conj(I_{l,k,j})
        t.I_p0p = std::conj(t.I_0p0);
        t.I_p00 = std::conj(t.I_00p);
        t.I_pp0 = std::conj(t.I_0pp);
        t.residual_overlap = std::abs(inner_product(g, p));
    } else {
        const std::vector<const ModeSolution*> ms{&g, &p};
        const auto acc = integrate_nodes<9>(
            ms, 2.0 * min_exponent_u(ms), 2.0 * min_exponent_v(ms), opts, [](const std::vector<Complex>& v) {
                const Complex a = v[0];
                const Complex b = v[1];
                const Complex ca = std::conj(a);
                const Complex cb = std::conj(b);
                const double na = std::norm(a);
                const double nb = std::norm(b);
                return std::array<Complex, 9>{ca * na * a, cb * nb * b, ca * nb * a, cb * na * b, ca * na * b,
                                              cb * na * a, ca * nb * b, cb * nb * a, ca * b};
            });
        t.I_000 = acc[0];
        t.I_ppp = acc[1];
        t.I_0p0 = acc[2];
        t.I_p0p = acc[3];
        t.I_00p = acc[4];
        t.I_p00 = acc[5];
        t.I_0pp = acc[6];
        t.I_pp0 = acc[7];
        t.residual_overlap = std::abs(acc[8]);
    }
    if (t.residual_overlap > kResidualWarnThreshold)
        t.warnings.push_back(fmt::format(
            "modes {{{}}} and {{{}}} overlap: |<phi_0|phi_p>| = {:.4f} exceeds {}; the two-mode basis is not "
            "orthogonal",
            t.ground.label(), t.excited.label(), t.residual_overlap, kResidualWarnThreshold));
    return t;
}

Excitability is_excitable(const OverlapTable& table)
{
    const double m = table.max_abs_drive();
    if (m < kExcitableThreshold)
        return {false, fmt::format("all drive couplings of {{{}}} vanish (max |I| = {:.3g} < {}); "
                                   "scattering-length modulation cannot populate it",
                                   table.excited.label(), m, kExcitableThreshold)};
    return {true, fmt::format("drive couplings of {{{}}} are nonzero (max |I| = {:.6g})", table.excited.label(), m)};
}

std::string to_json(const OverlapTable& t)
{
    auto entry = [](Complex c) { return nlohmann::ordered_json{{"re", c.real()}, {"im", c.imag()}}; };
    const Excitability ex = is_excitable(t);
    nlohmann::ordered_json j;
    j["ground"] = t.ground.label();
    j["excited"] = t.excited.label();
    j["g0"] = t.g0;
    j["lambda"] = t.lambda;
    j["density"] = {{"I_000", entry(t.I_000)}, {"I_ppp", entry(t.I_ppp)}, {"I_0p0", entry(t.I_0p0)},
                    {"I_p0p", entry(t.I_p0p)}};
    j["drive"] = {{"I_00p", entry(t.I_00p)}, {"I_p00", entry(t.I_p00)}, {"I_0pp", entry(t.I_0pp)},
                  {"I_pp0", entry(t.I_pp0)}};
    j["residual_overlap"] = t.residual_overlap;
    j["excitable"] = ex.excitable;
    j["reason"] = ex.reason;
    j["warnings"] = t.warnings;
    return j.dump(2);
}

}  // namespace becmode::overlaps
