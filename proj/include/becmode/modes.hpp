#pragma once

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace becmode::modes {

/// Cylindrical quantum numbers {n m k}: radial, azimuthal, axial.
struct ModeIndex {
    int n = 0;
    int m = 0;
    int k = 0;

    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;

    /// "100" style label.
    std::string label() const;
    /// True for the four shapes with closed-form ansatz: 000, 100, 010, 001.
    bool supported() const;
    /// Parses a three-digit label. Throws ParameterError on malformed input;
    /// well-formed but unsupported labels parse fine (see supported()).
    static ModeIndex parse(std::string_view text);
};

inline constexpr ModeIndex kGround{0, 0, 0};
inline constexpr ModeIndex kRadialDipole{1, 0, 0};
inline constexpr ModeIndex kVortex{0, 1, 0};
inline constexpr ModeIndex kAxialDipole{0, 0, 1};

/// Which functional fixes the ansatz widths (u, v).
enum class OptimizationCondition {
    /// Stationary point of the eigenvalue estimate KE + PE + g0 I_self
    /// (optimized perturbation theory). Default.
    EigenvalueStationary,
    /// Stationary point of the Gross-Pitaevskii functional
    /// KE + PE + (g0/2) I_self.
    FunctionalStationary,
};

struct SolveOptions {
    OptimizationCondition condition = OptimizationCondition::EigenvalueStationary;
    double tolerance = 1e-12;  // on the gradient norm
    int max_iterations = 200;
};

/// Closed-form expectation values of the ansatz with widths (u, v).
struct EnergyTerms {
    double kinetic = 0.0;
    double trap = 0.0;
    double quartic = 0.0;  // integral of |psi|^4
};

/// Optimized ansatz for one mode.
struct ModeSolution {
    ModeIndex index;
    double u = 1.0;
    double v = 1.0;
    /// Eigenvalue estimate KE + PE + g0 I_self, units of hbar omega_r.
    double energy = 0.0;
    /// Gross-Pitaevskii functional KE + PE + (g0/2) I_self at (u, v).
    double functional_value = 0.0;
    double gradient_norm = 0.0;
    double g0 = 0.0;
    double lambda = 1.0;
    /// Widths in the Gaussian factor. Equal to (u, v) except for the
    /// printed shared-exponent variant.
    double exponent_u = 1.0;
    double exponent_v = 1.0;
    OptimizationCondition condition = OptimizationCondition::EigenvalueStationary;
    int iterations = 0;
    std::vector<std::string> warnings;
};

/// Ground mode plus one excited mode solved at the same (g0, lambda).
struct ModePair {
    ModeSolution ground;
    ModeSolution excited;
    double omega_p0 = 0.0;  // (E_p - E_0) / (hbar omega_r)
};

EnergyTerms energy_terms(ModeIndex index, double u, double v, double lambda);

/// KE + PE + w g0 I_self with w = 1 or 1/2 according to the condition.
double optimized_functional(ModeIndex index, double u, double v, double g0, double lambda,
                            OptimizationCondition condition);

/// Analytic (d/du, d/dv) of optimized_functional.
std::array<double, 2> functional_gradient(ModeIndex index, double u, double v, double g0,
                                          double lambda, OptimizationCondition condition);

/// Ansatz value at cylindrical point (x_r, phi, x_z). Only the vortex mode
/// carries a phase (e^{i phi}).
std::complex<double> mode_function(const ModeSolution& sol, double x_r, double phi, double x_z);

/// Solve the stationarity conditions by damped Newton from (1, lambda),
/// falling back to alternating bisection. Throws UnsupportedModeError or
/// ConvergenceError (message carries the last iterate).
ModeSolution solve_mode(ModeIndex index, double g0, double lambda, const SolveOptions& options = {});

/// Ground + excited pair and their transition frequency.
ModePair transition_frequency(double g0, double lambda, ModeIndex excited,
                              const SolveOptions& options = {});

/// The excited-mode formulas as printed carry the ground-state widths in
/// the exponent while keeping their own prefactor. Returns a copy of
/// `excited` evaluated that way; its norm is no longer exactly one.
ModeSolution with_shared_ground_exponents(const ModeSolution& excited, const ModeSolution& ground);

}  // namespace becmode::modes
