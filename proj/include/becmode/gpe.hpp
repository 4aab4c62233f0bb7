#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "becmode/banded.hpp"
#include "becmode/modes.hpp"
#include "becmode/twomode.hpp"

namespace becmode::gpe {

using Complex = std::complex<double>;

/// Cell-centred grid of the m = 0 sector: x_r in (0, r_max), x_z in
/// (-z_max, z_max).
struct Grid2D {
    int nr = 256;
    int nz = 512;
    double r_max = 8.0;
    double z_max = 24.0;

    void validate() const;
    double dr() const { return r_max / nr; }
    double dz() const { return 2.0 * z_max / nz; }
    double r(int i) const { return (i + 0.5) * dr(); }
    double z(int j) const { return -z_max + (j + 0.5) * dz(); }
    std::size_t size() const { return static_cast<std::size_t>(nr) * static_cast<std::size_t>(nz); }
};

/// psi[i * nz + j] at (r_i, z_j).
struct FieldState {
    Grid2D grid;
    std::vector<Complex> psi;
    double tau = 0.0;
    double norm = 1.0;
};

/// Discrete Hamiltonian. Radial part: fourth-order flux form, symmetric
/// under the radial quadrature weights (axis cell weight 11 h^2 / 24).
/// Axial part: five-point fourth-order stencil, Dirichlet ends.
class Discretization {
public:
    Discretization(const Grid2D& grid, double lambda);

    const Grid2D& grid() const { return grid_; }
    double lambda() const { return lambda_; }
    /// 2 pi w_i dz: volume weight of cell (i, j).
    double volume(int i) const { return vol_[static_cast<std::size_t>(i)]; }

    /// (psi, phi) with the volume weights.
    Complex inner(const std::vector<Complex>& a, const std::vector<Complex>& b) const;
    double norm2(const std::vector<Complex>& a) const;

    /// H_lin psi (kinetic + trap), written to out.
    void apply_linear(const std::vector<Complex>& psi, std::vector<Complex>& out) const;
    /// Gross-Pitaevskii functional at coupling g.
    double energy(const std::vector<Complex>& psi, double g) const;
    /// <psi| H_lin + g |psi|^2 |psi>.
    double chemical_potential(const std::vector<Complex>& psi, double g) const;

    const banded::BandMatrix& radial_weight() const { return rw_; }  // R = diag(w)
    const banded::BandMatrix& radial_stiffness() const { return rs_; }  // S (kinetic + trap)
    const banded::BandMatrix& axial_operator() const { return az_; }  // H_z

private:
    Grid2D grid_;
    double lambda_;
    std::vector<double> w_;    // radial weights
    std::vector<double> vol_;  // 2 pi w_i dz
    banded::BandMatrix rw_;
    banded::BandMatrix rs_;
    banded::BandMatrix az_;
};

struct GroundStateOptions {
    double dtau = 0.1;
    double energy_tolerance = 1e-10;
    double residual_tolerance = 1e-8;
    int max_steps = 40000;
};

struct GroundState {
    FieldState state;
    double energy = 0.0;
    double chemical_potential = 0.0;
    double residual = 0.0;
    int steps = 0;
    /// Energy after each step of the first (plain imaginary-time) phase.
    std::vector<double> energy_history;
    std::vector<std::string> warnings;
};

/// Normalised imaginary-time flow from the Gaussian ansatz, then a
/// preconditioned residual iteration whose fixed point is the discrete
/// stationary state. Throws ConvergenceError past max_steps.
GroundState ground_state(double g0, double lambda, const Grid2D& grid, const GroundStateOptions& options = {});

struct PropagateOptions {
    double g0 = 0.0;
    double lambda = 1.0;
    double ratio = 0.0;
    double omega_drive = 0.0;
    double tau_max = 50.0;
    double dt = 5e-4;
    double sample_interval = 0.1;
    double norm_tolerance = 1e-6;
    modes::ModeIndex excited = modes::kRadialDipole;
};

struct Series {
    std::vector<double> tau;
    std::vector<double> n000;
    std::vector<double> n100;
    std::vector<double> leakage;
    std::vector<double> norm;
    std::vector<double> energy;
    std::vector<std::string> warnings;
};

/// Projection basis on the grid: the ground ansatz, and the excited
/// ansatz with the grid ground state projected out.
struct ProjectionBasis {
    std::vector<Complex> ground;
    std::vector<Complex> excited;
};

ProjectionBasis projection_basis(const Discretization& disc, const FieldState& grid_ground, double g0,
                                 modes::ModeIndex excited = modes::kRadialDipole);

/// Real-time Strang splitting: nonlinear phase with
/// g(tau) = g0 (1 + ratio cos(omega_drive tau)) around Crank-Nicolson in r
/// then z. Throws NumericalInstabilityError when the norm drifts past
/// norm_tolerance. `final_state` receives the last state if given.
Series propagate(const FieldState& initial, const ProjectionBasis& basis, const PropagateOptions& options,
                 FieldState* final_state = nullptr);

/// Operational threshold for agreement of first-maximum amplitudes.
inline constexpr double kAgreementLow = 0.8;
inline constexpr double kAgreementHigh = 1.25;

struct Comparison {
    std::optional<double> time_ratio;       // gpe / two-mode
    std::optional<double> amplitude_ratio;  // gpe / two-mode
    double first_max_tau_gpe = 0.0;
    double first_max_tau_twomode = 0.0;
    double first_max_gpe = 0.0;
    double first_max_twomode = 0.0;
    double rms = 0.0;
    double window = 0.0;  // smoothing window
    std::string note;

    bool within_band() const;
};

/// Compares excited populations. Both series are smoothed by a moving
/// average over `window` before the first local maximum is located.
/// Throws InsufficientHorizonError when the two-mode series rises but a
/// series holds no maximum.
Comparison compare_series(const std::vector<double>& tau_a, const std::vector<double>& n_a,
                          const std::vector<double>& tau_b, const std::vector<double>& n_b, double window);

Comparison compare_with_twomode(const Series& gpe, const twomode::TwoModeTrajectory& traj, double window);

std::string to_json(const Comparison& c);

/// CSV `tau,n000,n100,leakage,norm,energy`.
void write_series_csv(std::ostream& out, const Series& s, const std::vector<std::string>& comments = {});

/// |psi|^2 as an nr x nz CSV matrix (rows r, columns z) and the sidecar
/// JSON {nr, nz, r_max, z_max, tau}.
void write_snapshot(std::ostream& matrix, std::ostream& sidecar, const FieldState& state);

/// Ansatz sampled on the grid and normalised with the grid weights.
std::vector<Complex> sample_mode(const Discretization& disc, const modes::ModeSolution& sol);

}  // namespace becmode::gpe
