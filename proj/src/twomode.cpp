#include "becmode/twomode.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "becmode/csv.hpp"
#include "becmode/errors.hpp"

namespace becmode::twomode {

namespace {

constexpr Complex kI{0.0, 1.0};

// Derivatives with the drive phase e^{i delta tau} supplied by the caller.
Derivative rhs_with_phase(Complex c0, Complex cp, Complex phase, const DriveParams& d)
{
    const auto& t = d.table;
    const double a0 = d.g0;
    const double a = d.g0 * d.ratio;
    const double n0 = std::norm(c0);
    const double np = std::norm(cp);
    const Complex cphase = std::conj(phase);

    const Complex f0 = a0 * np * c0 * (2.0 * t.I_0p0 - t.I_000) +
                       0.5 * a * phase * (np * cp * t.I_0pp + 2.0 * n0 * cp * t.I_00p) +
                       0.5 * a * cphase * std::conj(cp) * c0 * c0 * t.I_p00;
    const Complex fp = a0 * n0 * cp * (2.0 * t.I_p0p - t.I_ppp) +
                       0.5 * a * cphase * (n0 * c0 * t.I_p00 + 2.0 * np * c0 * t.I_pp0) +
                       0.5 * a * phase * std::conj(c0) * cp * cp * t.I_0pp;
    return {-kI * f0, -kI * fp};
}

}  // namespace

void DriveParams::validate() const
{
    if (!std::isfinite(g0))
        throw ParameterError("g0 must be finite");
    if (!(ratio >= 0.0) || !std::isfinite(ratio))
        throw ParameterError(fmt::format("drive ratio a/a0 must be >= 0 (got {})", ratio));
    if (!std::isfinite(delta))
        throw ParameterError("detuning must be finite");
}

std::vector<std::string> DriveParams::warnings() const
{
    std::vector<std::string> out = table.warnings;
    if (omega_p0 > 0.0) {
        const double r = std::abs(g0 * ratio) * table.max_abs() / omega_p0;
        if (r > 0.5)
            out.push_back(fmt::format(
                "drive amplitude g0*ratio*max|I| = {:.4g} is {:.2f} of omega_p0; the slow-envelope reduction "
                "is doubtful",
                std::abs(g0 * ratio) * table.max_abs(), r));
    }
    if (ratio > 0.0) {
        const auto ex = overlaps::is_excitable(table);
        if (!ex.excitable)
            out.push_back(ex.reason);
    }
    return out;
}

DriveParams make_drive(double g0, double lambda, double ratio, double delta, modes::ModeIndex excited,
                       const modes::SolveOptions& options)
{
    DriveParams d;
    d.g0 = g0;
    d.ratio = ratio;
    d.delta = delta;
    d.validate();
    const modes::ModePair pair = modes::transition_frequency(g0, lambda, excited, options);
    d.omega_p0 = pair.omega_p0;
    d.table = overlaps::build_table(pair);
    return d;
}

Derivative rhs(const TwoModeState& s, const DriveParams& drive)
{
    return rhs_with_phase(s.c0, s.cp, std::polar(1.0, drive.delta * s.tau), drive);
}

double TwoModeTrajectory::max_norm_drift() const
{
    double m = 0.0;
    for (std::size_t i = 0; i < n0.size(); ++i)
        m = std::max(m, std::abs(n0[i] + np[i] - 1.0));
    return m;
}

double stiffness(const DriveParams& drive)
{
    return std::max({1.0, std::abs(drive.delta), std::abs(drive.g0) * drive.table.max_abs()});
}

TwoModeTrajectory integrate(const DriveParams& drive, const IntegrateOptions& opt, const TwoModeState& initial)
{
    drive.validate();
    if (!(opt.dtau > 0.0) || !std::isfinite(opt.dtau))
        throw ParameterError(fmt::format("dtau must be > 0 (got {})", opt.dtau));
    if (!(opt.tau_max > 0.0) || !std::isfinite(opt.tau_max))
        throw ParameterError(fmt::format("tau_max must be > 0 (got {})", opt.tau_max));
    if (opt.sample_stride < 1)
        throw ParameterError("sample_stride must be >= 1");
    const double k = stiffness(drive);
    if (opt.dtau * k >= kStabilityLimit)
        throw StepSizeError(fmt::format(
            "stability guard: dtau * max(1, |delta|, |g0| max|I|) = {} * {:.6g} = {:.4g} must stay below {}",
            opt.dtau, k, opt.dtau * k, kStabilityLimit));

    const auto nsteps = static_cast<long long>(std::ceil(opt.tau_max / opt.dtau - 1e-9));
    const double h = opt.tau_max / static_cast<double>(nsteps);

    TwoModeTrajectory traj;
    traj.dtau = h;
    traj.warnings = drive.warnings();
    const std::size_t nsamples = static_cast<std::size_t>(nsteps / opt.sample_stride) + 2;
    traj.tau.reserve(nsamples);
    traj.states.reserve(nsamples);
    traj.n0.reserve(nsamples);
    traj.np.reserve(nsamples);
    traj.cum_n0.reserve(nsamples);
    traj.cum_np.reserve(nsamples);

    Complex c0 = initial.c0;
    Complex cp = initial.cp;
    const double tau0 = initial.tau;
    double int0 = 0.0;
    double intp = 0.0;
    auto record = [&](double tau) {
        traj.tau.push_back(tau);
        traj.states.push_back({c0, cp, tau});
        traj.n0.push_back(std::norm(c0));
        traj.np.push_back(std::norm(cp));
        traj.cum_n0.push_back(int0);
        traj.cum_np.push_back(intp);
    };
    record(tau0);

    const double w = drive.delta;
    for (long long step = 0; step < nsteps; ++step) {
        const double tau = tau0 + h * static_cast<double>(step);
        const Complex ph0 = std::polar(1.0, w * tau);
        const Complex ph1 = std::polar(1.0, w * (tau + 0.5 * h));
        const Complex ph2 = std::polar(1.0, w * (tau + h));
        const double n0a = std::norm(c0);
        const double npa = std::norm(cp);

        const Derivative k1 = rhs_with_phase(c0, cp, ph0, drive);
        const Derivative k2 = rhs_with_phase(c0 + 0.5 * h * k1.dc0, cp + 0.5 * h * k1.dcp, ph1, drive);
        const Derivative k3 = rhs_with_phase(c0 + 0.5 * h * k2.dc0, cp + 0.5 * h * k2.dcp, ph1, drive);
        const Derivative k4 = rhs_with_phase(c0 + h * k3.dc0, cp + h * k3.dcp, ph2, drive);
        c0 += (h / 6.0) * (k1.dc0 + 2.0 * k2.dc0 + 2.0 * k3.dc0 + k4.dc0);
        cp += (h / 6.0) * (k1.dcp + 2.0 * k2.dcp + 2.0 * k3.dcp + k4.dcp);

        int0 += 0.5 * h * (n0a + std::norm(c0));
        intp += 0.5 * h * (npa + std::norm(cp));
        if (!std::isfinite(c0.real()) || !std::isfinite(cp.real()))
            throw NumericalInstabilityError(fmt::format("amplitudes diverged at tau = {}", tau + h));
        if ((step + 1) % opt.sample_stride == 0 || step + 1 == nsteps)
            record(tau0 + h * static_cast<double>(step + 1));
    }
    return traj;
}

ConvergenceReport convergence_check(const DriveParams& drive, double tau_max, double dtau)
{
    auto endpoint = [&](double h) {
        IntegrateOptions o;
        o.tau_max = tau_max;
        o.dtau = h;
        o.sample_stride = 1 << 30;
        const auto tr = integrate(drive, o);
        return tr.states.back();
    };
    const TwoModeState a = endpoint(dtau);
    const TwoModeState b = endpoint(0.5 * dtau);
    const TwoModeState c = endpoint(0.25 * dtau);
    auto dist = [](const TwoModeState& x, const TwoModeState& y) {
        return std::sqrt(std::norm(x.c0 - y.c0) + std::norm(x.cp - y.cp));
    };
    ConvergenceReport rep;
    rep.diff_coarse = dist(a, b);
    rep.diff_fine = dist(b, c);
    if (rep.diff_coarse == 0.0 || rep.diff_fine == 0.0) {
        rep.note = "endpoint differences vanish; order undefined";
        return rep;
    }
    rep.order = std::log2(rep.diff_coarse / rep.diff_fine);
    if (rep.diff_fine < 1e-13)
        rep.note = "differences near round-off; order estimate unreliable";
    return rep;
}

void write_csv(std::ostream& out, const TwoModeTrajectory& t, const std::vector<std::string>& comments)
{
    csv::write_comments(out, comments);
    out << "tau,n0,np,re_c0,im_c0,re_cp,im_cp\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& s = t.states[i];
        out << csv::number(t.tau[i]) << ',' << csv::number(t.n0[i]) << ',' << csv::number(t.np[i]) << ','
            << csv::number(s.c0.real()) << ',' << csv::number(s.c0.imag()) << ',' << csv::number(s.cp.real())
            << ',' << csv::number(s.cp.imag()) << '\n';
    }
    if (!out)
        throw IoError("failed writing trajectory CSV");
}

}  // namespace becmode::twomode
