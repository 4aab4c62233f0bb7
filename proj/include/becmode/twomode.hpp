#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "becmode/modes.hpp"
#include "becmode/overlaps.hpp"

namespace becmode::twomode {

using Complex = std::complex<double>;

struct TwoModeState {
    Complex c0{1.0, 0.0};
    Complex cp{0.0, 0.0};
    double tau = 0.0;
};

/// Drive in trap units: A0 -> g0, A -> g0 * ratio, detuning delta.
struct DriveParams {
    double g0 = 0.0;
    double ratio = 0.0;
    double delta = 0.0;
    /// Transition frequency used for the slow-envelope check; 0 skips it.
    double omega_p0 = 0.0;
    overlaps::OverlapTable table;

    void validate() const;
    /// Amplitude-validity, excitability and basis warnings.
    std::vector<std::string> warnings() const;
};

/// Solves both modes at (g0, lambda), builds the closed-form table and
/// fills omega_p0.
DriveParams make_drive(double g0, double lambda, double ratio, double delta,
                       modes::ModeIndex excited = modes::kRadialDipole, const modes::SolveOptions& options = {});

struct Derivative {
    Complex dc0;
    Complex dcp;
};

/// Right-hand side of the coupled amplitude equations at state.tau.
Derivative rhs(const TwoModeState& state, const DriveParams& drive);

struct IntegrateOptions {
    double tau_max = 200.0;
    double dtau = 1e-3;
    int sample_stride = 100;
};

/// Samples of the fixed-step RK4 solution. cum_n0/cum_np hold the running
/// trapezoid integrals of the populations over every step up to each sample,
/// so time averages do not depend on the sampling stride.
struct TwoModeTrajectory {
    std::vector<double> tau;
    std::vector<TwoModeState> states;
    std::vector<double> n0;
    std::vector<double> np;
    std::vector<double> cum_n0;
    std::vector<double> cum_np;
    double dtau = 0.0;  // step actually taken
    std::vector<std::string> warnings;

    std::size_t size() const { return tau.size(); }
    double max_norm_drift() const;
};

/// Largest product entering the stability guard: max(1, |delta|, |g0| max|I|).
double stiffness(const DriveParams& drive);
inline constexpr double kStabilityLimit = 0.1;

/// Classical RK4 from `initial` to tau_max. The step is tau_max / ceil(tau_max / dtau).
/// Throws StepSizeError when dtau * stiffness >= 0.1.
TwoModeTrajectory integrate(const DriveParams& drive, const IntegrateOptions& options = {},
                            const TwoModeState& initial = {});

struct ConvergenceReport {
    std::optional<double> order;  // empty when the differences vanish
    double diff_coarse = 0.0;     // |y(h) - y(h/2)| at tau_max
    double diff_fine = 0.0;       // |y(h/2) - y(h/4)| at tau_max
    std::string note;
};

/// Observed order from endpoint differences at steps h, h/2, h/4.
ConvergenceReport convergence_check(const DriveParams& drive, double tau_max, double dtau);

/// CSV with header `tau,n0,np,re_c0,im_c0,re_cp,im_cp`; `comments` lines go
/// first, each prefixed with '#'.
void write_csv(std::ostream& out, const TwoModeTrajectory& traj, const std::vector<std::string>& comments = {});

}  // namespace becmode::twomode
