#include "becmode/gpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "becmode/csv.hpp"
#include "becmode/errors.hpp"
#include "becmode/units.hpp"

namespace becmode::gpe {

namespace {

using banded::BandLU;
using banded::BandMatrix;
using units::kTwoPi;

// Face k (k = 1 .. nr + 1) sits at r = k h between cells k - 1 and k.
// Fourth-order derivative stencil over cells k - 2 .. k + 1; cells below
// the axis mirror onto i -> -1 - i, cells past the edge are zero.
std::vector<std::pair<int, double>> face_stencil(int k, int nr, double h)
{
    static constexpr int kOffset[4] = {-2, -1, 0, 1};
    static constexpr double kCoef[4] = {1.0, -27.0, 27.0, -1.0};
    std::vector<std::pair<int, double>> out;
    for (int m = 0; m < 4; ++m) {
        int i = k + kOffset[m];
        if (i < 0)
            i = -1 - i;
        if (i >= nr)
            continue;
        const double c = kCoef[m] / (24.0 * h);
        auto it = std::find_if(out.begin(), out.end(), [i](const auto& e) { return e.first == i; });
        if (it == out.end())
            out.emplace_back(i, c);
        else
            it->second += c;
    }
    return out;
}

class Stepper {
public:
    // Factors R + c S along r and I + c H_z along z. Real time uses
    // c = i dt / 2, imaginary time c = dtau.
    Stepper(const Discretization& d, Complex c)
        : grid_(d.grid()),
          r_lu_(BandMatrix::combine(1.0, d.radial_weight(), c, d.radial_stiffness())),
          z_lu_(identity_plus(c, d.axial_operator())),
          w_(static_cast<std::size_t>(d.grid().nr)),
          tmp_(d.grid().size())
    {
        for (std::size_t i = 0; i < w_.size(); ++i)
            w_[i] = d.radial_weight().at(i, i).real();
    }

    // Crank-Nicolson in r then z, using
    // (R + c S)^{-1} (R - c S) psi = 2 (R + c S)^{-1} R psi - psi.
    void crank_nicolson(std::vector<Complex>& psi)
    {
        const auto nz = static_cast<std::size_t>(grid_.nz);
        const auto nr = static_cast<std::size_t>(grid_.nr);
        for (std::size_t i = 0; i < nr; ++i) {
            const double two_w = 2.0 * w_[i];
            for (std::size_t j = 0; j < nz; ++j)
                tmp_[i * nz + j] = two_w * psi[i * nz + j];
        }
        r_lu_.solve(tmp_.data(), nz, 1, nz);
        for (std::size_t k = 0; k < psi.size(); ++k) {
            tmp_[k] -= psi[k];
            psi[k] = 2.0 * tmp_[k];
        }
        z_lu_.solve(psi.data(), 1, nz, nr);
        for (std::size_t k = 0; k < psi.size(); ++k)
            psi[k] -= tmp_[k];
    }

    // x <- (I + c H_z)^{-1} (R + c S)^{-1} R x
    void backward_euler(std::vector<Complex>& x)
    {
        const auto nz = static_cast<std::size_t>(grid_.nz);
        const auto nr = static_cast<std::size_t>(grid_.nr);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nz; ++j)
                x[i * nz + j] *= w_[i];
        r_lu_.solve(x.data(), nz, 1, nz);
        z_lu_.solve(x.data(), 1, nz, nr);
    }

private:
    static BandMatrix identity_plus(Complex c, const BandMatrix& a)
    {
        BandMatrix id(a.size(), a.lower(), a.upper());
        for (std::size_t i = 0; i < a.size(); ++i)
            id.at(i, i) = 1.0;
        return BandMatrix::combine(1.0, id, c, a);
    }

    Grid2D grid_;
    BandLU r_lu_;
    BandLU z_lu_;
    std::vector<double> w_;
    std::vector<Complex> tmp_;
};

// e^{i theta}; the per-step phases are tiny, where a short Taylor series
// is exact to rounding and much cheaper than sin/cos.
inline Complex unit_phase(double theta)
{
    if (std::abs(theta) > 0.05)
        return std::polar(1.0, theta);
    const double t2 = theta * theta;
    const double c = 1.0 + t2 * (-1.0 / 2 + t2 * (1.0 / 24 + t2 * (-1.0 / 720 + t2 * (1.0 / 40320))));
    const double s = theta * (1.0 + t2 * (-1.0 / 6 + t2 * (1.0 / 120 + t2 * (-1.0 / 5040 + t2 * (1.0 / 362880)))));
    return {c, s};
}

void normalize(const Discretization& d, std::vector<Complex>& psi)
{
    const double n = std::sqrt(d.norm2(psi));
    if (!(n > 0.0) || !std::isfinite(n))
        throw NumericalInstabilityError("field norm vanished or diverged");
    for (auto& x : psi)
        x /= n;
}

double boundary_ratio(const Grid2D& g, const std::vector<Complex>& psi)
{
    double peak = 0.0;
    double edge = 0.0;
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nz; ++j) {
            const double a = std::norm(psi[static_cast<std::size_t>(i) * g.nz + j]);
            peak = std::max(peak, a);
            if (i == g.nr - 1 || j == 0 || j == g.nz - 1)
                edge = std::max(edge, a);
        }
    return peak > 0.0 ? edge / peak : 0.0;
}

}  // namespace

void Grid2D::validate() const
{
    if (nr < 16 || nz < 16)
        throw ParameterError(fmt::format("grid needs nr, nz >= 16 (got {} x {})", nr, nz));
    if (!(r_max > 0.0) || !(z_max > 0.0) || !std::isfinite(r_max) || !std::isfinite(z_max))
        throw ParameterError(fmt::format("grid extents must be positive (r_max = {}, z_max = {})", r_max, z_max));
}

Discretization::Discretization(const Grid2D& grid, double lambda) : grid_(grid), lambda_(lambda)
{
    grid.validate();
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ParameterError(fmt::format("lambda must be positive (got {})", lambda));
    const int nr = grid.nr;
    const int nz = grid.nz;
    const double h = grid.dr();
    const double dz = grid.dz();

    w_.resize(static_cast<std::size_t>(nr));
    vol_.resize(static_cast<std::size_t>(nr));
    for (int i = 0; i < nr; ++i)
        w_[static_cast<std::size_t>(i)] = grid.r(i) * h;
    // end-corrected midpoint weight of the axis cell
    w_[0] = 11.0 * h * h / 24.0;
    for (int i = 0; i < nr; ++i)
        vol_[static_cast<std::size_t>(i)] = kTwoPi * w_[static_cast<std::size_t>(i)] * dz;

    rw_ = BandMatrix(static_cast<std::size_t>(nr), 3, 3);
    rs_ = BandMatrix(static_cast<std::size_t>(nr), 3, 3);
    for (int i = 0; i < nr; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        rw_.at(ui, ui) = w_[ui];
        rs_.at(ui, ui) = 0.5 * w_[ui] * grid.r(i) * grid.r(i);
    }
    // S = (h / 2) G^T diag(r_f) G
    for (int k = 1; k <= nr + 1; ++k) {
        const auto st = face_stencil(k, nr, h);
        const double rf = k * h;
        for (const auto& [i, ci] : st)
            for (const auto& [j, cj] : st)
                rs_.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) += 0.5 * h * rf * ci * cj;
    }

    az_ = BandMatrix(static_cast<std::size_t>(nz), 2, 2);
    const double c = 1.0 / (24.0 * dz * dz);
    for (int j = 0; j < nz; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        const double zj = grid.z(j);
        az_.at(uj, uj) = 30.0 * c + 0.5 * lambda * lambda * zj * zj;
        if (j + 1 < nz) {
            az_.at(uj, uj + 1) = -16.0 * c;
            az_.at(uj + 1, uj) = -16.0 * c;
        }
        if (j + 2 < nz) {
            az_.at(uj, uj + 2) = c;
            az_.at(uj + 2, uj) = c;
        }
    }
}

Complex Discretization::inner(const std::vector<Complex>& a, const std::vector<Complex>& b) const
{
    const auto nz = static_cast<std::size_t>(grid_.nz);
    Complex total = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(grid_.nr); ++i) {
        Complex row = 0.0;
        for (std::size_t j = 0; j < nz; ++j)
            row += std::conj(a[i * nz + j]) * b[i * nz + j];
        total += vol_[i] * row;
    }
    return total;
}

double Discretization::norm2(const std::vector<Complex>& a) const
{
    const auto nz = static_cast<std::size_t>(grid_.nz);
    double total = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(grid_.nr); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nz; ++j)
            row += std::norm(a[i * nz + j]);
        total += vol_[i] * row;
    }
    return total;
}

void Discretization::apply_linear(const std::vector<Complex>& psi, std::vector<Complex>& out) const
{
    const auto nz = static_cast<std::size_t>(grid_.nz);
    const auto nr = static_cast<std::size_t>(grid_.nr);
    out.resize(psi.size());
    rs_.multiply(psi.data(), out.data(), nz, 1, nz);
    for (std::size_t i = 0; i < nr; ++i) {
        const double inv = 1.0 / w_[i];
        for (std::size_t j = 0; j < nz; ++j)
            out[i * nz + j] *= inv;
    }
    std::vector<Complex> tmp(psi.size());
    az_.multiply(psi.data(), tmp.data(), 1, nz, nr);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] += tmp[k];
}

double Discretization::energy(const std::vector<Complex>& psi, double g) const
{
    std::vector<Complex> h;
    apply_linear(psi, h);
    double quartic = 0.0;
    const auto nz = static_cast<std::size_t>(grid_.nz);
    for (std::size_t i = 0; i < static_cast<std::size_t>(grid_.nr); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nz; ++j) {
            const double a = std::norm(psi[i * nz + j]);
            row += a * a;
        }
        quartic += vol_[i] * row;
    }
    return inner(psi, h).real() + 0.5 * g * quartic;
}

double Discretization::chemical_potential(const std::vector<Complex>& psi, double g) const
{
    std::vector<Complex> h;
    apply_linear(psi, h);
    for (std::size_t k = 0; k < psi.size(); ++k)
        h[k] += g * std::norm(psi[k]) * psi[k];
    return inner(psi, h).real() / norm2(psi);
}

std::vector<Complex> sample_mode(const Discretization& disc, const modes::ModeSolution& sol)
{
    const Grid2D& g = disc.grid();
    std::vector<Complex> out(g.size());
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nz; ++j)
            out[static_cast<std::size_t>(i) * g.nz + j] = modes::mode_function(sol, g.r(i), 0.0, g.z(j));
    normalize(disc, out);
    return out;
}

GroundState ground_state(double g0, double lambda, const Grid2D& grid, const GroundStateOptions& opt)
{
    if (!std::isfinite(g0))
        throw ParameterError("g0 must be finite");
    if (!(opt.dtau > 0.0) || opt.max_steps < 1)
        throw ParameterError("ground-state options need dtau > 0 and max_steps >= 1");
    const Discretization disc(grid, lambda);
    const modes::ModeSolution seed = modes::solve_mode(modes::kGround, std::max(g0, 0.0), lambda);

    GroundState out;
    std::vector<Complex> psi = sample_mode(disc, seed);
    Stepper be(disc, Complex(opt.dtau, 0.0));

    // Phase 1: normalised Lie backward-Euler imaginary-time steps while the
    // energy keeps dropping.
    double e_old = disc.energy(psi, g0);
    out.energy_history.push_back(e_old);
    int steps = 0;
    while (steps < opt.max_steps) {
        ++steps;
        std::vector<Complex> next = psi;
        for (auto& x : next)
            x *= std::exp(-g0 * std::norm(x) * opt.dtau);
        be.backward_euler(next);
        normalize(disc, next);
        const double e = disc.energy(next, g0);
        if (!(e < e_old))
            break;
        psi.swap(next);
        out.energy_history.push_back(e);
        const double change = e_old - e;
        e_old = e;
        if (change < 1e-7 * std::max(1.0, std::abs(e)))
            break;
    }

    // Phase 2: psi <- psi - dtau P^{-1} (H psi - mu psi), P the split
    // backward-Euler factors.
    std::vector<Complex> h;
    double residual = std::numeric_limits<double>::infinity();
    double change = std::numeric_limits<double>::infinity();
    while (steps < opt.max_steps) {
        ++steps;
        disc.apply_linear(psi, h);
        for (std::size_t k = 0; k < psi.size(); ++k)
            h[k] += g0 * std::norm(psi[k]) * psi[k];
        const double mu = disc.inner(psi, h).real();
        for (std::size_t k = 0; k < psi.size(); ++k)
            h[k] -= mu * psi[k];
        residual = std::sqrt(disc.norm2(h));
        be.backward_euler(h);
        for (std::size_t k = 0; k < psi.size(); ++k)
            psi[k] -= opt.dtau * h[k];
        normalize(disc, psi);
        const double e = disc.energy(psi, g0);
        change = std::abs(e - e_old);
        e_old = e;
        if (change < opt.energy_tolerance && residual < opt.residual_tolerance)
            break;
    }
    if (!(change < opt.energy_tolerance && residual < opt.residual_tolerance))
        throw ConvergenceError(fmt::format(
            "ground state did not converge in {} steps (last energy change {:.3g}, residual {:.3g})", opt.max_steps,
            change, residual));

    out.state.grid = grid;
    out.state.psi = std::move(psi);
    out.state.norm = disc.norm2(out.state.psi);
    out.energy = disc.energy(out.state.psi, g0);
    out.chemical_potential = disc.chemical_potential(out.state.psi, g0);
    out.residual = residual;
    out.steps = steps;
    const double edge = boundary_ratio(grid, out.state.psi);
    if (edge > 1e-12)
        out.warnings.push_back(
            fmt::format("density at the grid edge is {:.3g} of the peak; enlarge r_max or z_max", edge));
    return out;
}

ProjectionBasis projection_basis(const Discretization& disc, const FieldState& grid_ground, double g0,
                                 modes::ModeIndex excited)
{
    const Grid2D& a = disc.grid();
    const Grid2D& b0 = grid_ground.grid;
    if (a.nr != b0.nr || a.nz != b0.nz || a.r_max != b0.r_max || a.z_max != b0.z_max ||
        grid_ground.psi.size() != a.size())
        throw ParameterError("ground state and discretization live on different grids");
    const modes::ModePair pair = modes::transition_frequency(g0, disc.lambda(), excited);
    ProjectionBasis b;
    b.ground = sample_mode(disc, pair.ground);
    b.excited = sample_mode(disc, pair.excited);
    const Complex c = disc.inner(grid_ground.psi, b.excited) / disc.norm2(grid_ground.psi);
    for (std::size_t k = 0; k < b.excited.size(); ++k)
        b.excited[k] -= c * grid_ground.psi[k];
    normalize(disc, b.excited);
    return b;
}

Series propagate(const FieldState& initial, const ProjectionBasis& basis, const PropagateOptions& opt,
                 FieldState* final_state)
{
    if (!(opt.dt > 0.0) || !std::isfinite(opt.dt))
        throw ParameterError(fmt::format("dt must be > 0 (got {})", opt.dt));
    if (!(opt.tau_max > 0.0))
        throw ParameterError(fmt::format("tau_max must be > 0 (got {})", opt.tau_max));
    if (!(opt.ratio >= 0.0))
        throw ParameterError(fmt::format("ratio must be >= 0 (got {})", opt.ratio));
    if (!(opt.sample_interval > 0.0))
        throw ParameterError("sample interval must be > 0");
    if (opt.dt * std::max(1.0, std::abs(opt.g0)) > 0.05)
        throw StepSizeError(fmt::format("dt * max(1, |g0|) = {:.4g} exceeds 0.05; the nonlinear phase is unresolved",
                                        opt.dt * std::max(1.0, std::abs(opt.g0))));
    const Discretization disc(initial.grid, opt.lambda);
    if (initial.psi.size() != initial.grid.size() || basis.ground.size() != initial.psi.size() ||
        basis.excited.size() != initial.psi.size())
        throw ParameterError("state and projection basis do not match the grid");

    const auto nsteps = static_cast<long long>(std::llround(opt.tau_max / opt.dt));
    const double dt = opt.tau_max / static_cast<double>(nsteps);
    const long long stride = std::max<long long>(1, std::llround(opt.sample_interval / dt));
    Stepper cn(disc, Complex(0.0, 0.5 * dt));

    std::vector<Complex> psi = initial.psi;
    const double norm0 = disc.norm2(psi);
    auto coupling = [&](double tau) { return opt.g0 * (1.0 + opt.ratio * std::cos(opt.omega_drive * tau)); };
    auto phase = [&](double theta_per_density) {
        for (auto& x : psi)
            x *= unit_phase(-theta_per_density * std::norm(x));
    };

    Series s;
    const double t0 = initial.tau;
    auto record = [&](double tau) {
        const double n0 = std::norm(disc.inner(basis.ground, psi));
        const double n1 = std::norm(disc.inner(basis.excited, psi));
        const double nn = disc.norm2(psi);
        s.tau.push_back(tau);
        s.n000.push_back(n0);
        s.n100.push_back(n1);
        s.leakage.push_back(1.0 - n0 - n1);
        s.norm.push_back(nn);
        s.energy.push_back(disc.energy(psi, coupling(tau)));
        if (!(std::abs(nn - norm0) <= opt.norm_tolerance))
            throw NumericalInstabilityError(
                fmt::format("norm drifted by {:.3g} at tau = {} (tolerance {})", nn - norm0, tau, opt.norm_tolerance));
    };
    record(t0);

    // Strang splitting with adjacent nonlinear half steps merged.
    phase(coupling(t0 + 0.5 * dt) * 0.5 * dt);
    for (long long n = 0; n < nsteps; ++n) {
        cn.crank_nicolson(psi);
        const double g_now = coupling(t0 + (static_cast<double>(n) + 0.5) * dt);
        const bool sample = (n + 1) % stride == 0 || n + 1 == nsteps;
        if (sample) {
            phase(g_now * 0.5 * dt);
            record(t0 + static_cast<double>(n + 1) * dt);
            if (n + 1 < nsteps)
                phase(coupling(t0 + (static_cast<double>(n) + 1.5) * dt) * 0.5 * dt);
        } else {
            phase((g_now + coupling(t0 + (static_cast<double>(n) + 1.5) * dt)) * 0.5 * dt);
        }
    }
    if (final_state) {
        final_state->grid = initial.grid;
        final_state->psi = psi;
        final_state->tau = t0 + opt.tau_max;
        final_state->norm = disc.norm2(psi);
    }
    return s;
}

namespace {

std::vector<double> moving_average(const std::vector<double>& t, const std::vector<double>& x, double window)
{
    const std::size_t n = t.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + x[i];
    std::vector<double> out(n);
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (t[lo] < t[i] - 0.5 * window)
            ++lo;
        while (hi < n && t[hi] <= t[i] + 0.5 * window)
            ++hi;
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

// First local maximum that also dominates its +-window neighbourhood.
std::optional<std::size_t> first_maximum(const std::vector<double>& t, const std::vector<double>& s, double window)
{
    const std::size_t n = s.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(s[i] > s[i - 1] && s[i] >= s[i + 1]))
            continue;
        if (t[i] + window > t.back())
            return std::nullopt;
        bool dominant = true;
        for (std::size_t k = 0; k < n && dominant; ++k)
            if (std::abs(t[k] - t[i]) <= window && s[k] > s[i])
                dominant = false;
        if (dominant)
            return i;
    }
    return std::nullopt;
}

double interpolate(const std::vector<double>& t, const std::vector<double>& x, double at)
{
    if (at <= t.front())
        return x.front();
    if (at >= t.back())
        return x.back();
    const auto it = std::upper_bound(t.begin(), t.end(), at);
    const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    const double s = (at - t[i]) / (t[i + 1] - t[i]);
    return x[i] + s * (x[i + 1] - x[i]);
}

}  // namespace

bool Comparison::within_band() const
{
    return amplitude_ratio && *amplitude_ratio >= kAgreementLow && *amplitude_ratio <= kAgreementHigh;
}

Comparison compare_series(const std::vector<double>& tau_a, const std::vector<double>& n_a,
                          const std::vector<double>& tau_b, const std::vector<double>& n_b, double window)
{
    if (tau_a.size() != n_a.size() || tau_b.size() != n_b.size() || tau_a.size() < 3 || tau_b.size() < 3)
        throw InsufficientHorizonError("comparison needs two series with at least three samples each");
    if (!(window >= 0.0))
        throw ParameterError("smoothing window must be >= 0");
    Comparison c;
    c.window = window;
    const auto sa = moving_average(tau_a, n_a, window);
    const auto sb = moving_average(tau_b, n_b, window);
    const auto [bmin, bmax] = std::minmax_element(n_b.begin(), n_b.end());
    double horizon = std::min(tau_a.back(), tau_b.back());

    if (*bmax - *bmin < 1e-9) {
        c.note = "reference population is flat; first-maximum ratios undefined";
    } else {
        const auto ia = first_maximum(tau_a, sa, window);
        const auto ib = first_maximum(tau_b, sb, window);
        if (!ib)
            throw InsufficientHorizonError("two-mode series has no first maximum inside its horizon");
        if (!ia)
            throw InsufficientHorizonError("simulated series has no first maximum inside its horizon");
        c.first_max_tau_gpe = tau_a[*ia];
        c.first_max_tau_twomode = tau_b[*ib];
        c.first_max_gpe = sa[*ia];
        c.first_max_twomode = sb[*ib];
        c.time_ratio = c.first_max_tau_gpe / c.first_max_tau_twomode;
        c.amplitude_ratio = c.first_max_gpe / c.first_max_twomode;
        horizon = std::min(horizon, 2.0 * c.first_max_tau_twomode);
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < tau_a.size() && tau_a[i] <= horizon + 1e-12; ++i) {
        const double d = n_a[i] - interpolate(tau_b, n_b, tau_a[i]);
        sum += d * d;
        ++count;
    }
    c.rms = count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
    return c;
}

Comparison compare_with_twomode(const Series& gpe, const twomode::TwoModeTrajectory& traj, double window)
{
    return compare_series(gpe.tau, gpe.n100, traj.tau, traj.np, window);
}

std::string to_json(const Comparison& c)
{
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["first_max_time_ratio"] = opt(c.time_ratio);
    j["first_max_amplitude_ratio"] = opt(c.amplitude_ratio);
    j["first_max_tau_gpe"] = c.first_max_tau_gpe;
    j["first_max_tau_twomode"] = c.first_max_tau_twomode;
    j["first_max_gpe"] = c.first_max_gpe;
    j["first_max_twomode"] = c.first_max_twomode;
    j["rms_first_cycle"] = c.rms;
    j["smoothing_window"] = c.window;
    j["agreement_band"] = {kAgreementLow, kAgreementHigh};
    j["agreement_band_note"] = "operational threshold on the amplitude ratio at small drive";
    j["within_band"] = c.within_band();
    if (!c.note.empty())
        j["note"] = c.note;
    return j.dump(2);
}

void write_series_csv(std::ostream& out, const Series& s, const std::vector<std::string>& comments)
{
    csv::write_comments(out, comments);
    out << "tau,n000,n100,leakage,norm,energy\n";
    for (std::size_t i = 0; i < s.tau.size(); ++i)
        out << csv::number(s.tau[i]) << ',' << csv::number(s.n000[i]) << ',' << csv::number(s.n100[i]) << ','
            << csv::number(s.leakage[i]) << ',' << csv::number(s.norm[i]) << ',' << csv::number(s.energy[i]) << '\n';
    if (!out)
        throw IoError("failed writing series CSV");
}

void write_snapshot(std::ostream& matrix, std::ostream& sidecar, const FieldState& state)
{
    const Grid2D& g = state.grid;
    for (int i = 0; i < g.nr; ++i) {
        for (int j = 0; j < g.nz; ++j) {
            if (j)
                matrix << ',';
            matrix << csv::number(std::norm(state.psi[static_cast<std::size_t>(i) * g.nz + j]));
        }
        matrix << '\n';
    }
    nlohmann::ordered_json j{{"nr", g.nr}, {"nz", g.nz}, {"r_max", g.r_max}, {"z_max", g.z_max}, {"tau", state.tau}};
    sidecar << j.dump(2) << '\n';
    if (!matrix || !sidecar)
        throw IoError("failed writing snapshot");
}

}  // namespace becmode::gpe
