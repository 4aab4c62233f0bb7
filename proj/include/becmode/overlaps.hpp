#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "becmode/modes.hpp"

namespace becmode::overlaps {

using Complex = std::complex<double>;

/// Mode-pair integrals I_{j,k,l} = int conj(phi_j) |phi_k|^2 phi_l d^3x with
/// j, k, l in {0, p}.
struct OverlapTable {
    modes::ModeIndex ground;
    modes::ModeIndex excited;
    double g0 = 0.0;
    double lambda = 1.0;

    // density group
    Complex I_000;
    Complex I_ppp;
    Complex I_0p0;
    Complex I_p0p;
    // drive couplings
    Complex I_00p;
    Complex I_p00;
    Complex I_0pp;
    Complex I_pp0;

    /// |<phi_0|phi_p>|
    double residual_overlap = 0.0;
    std::vector<std::string> warnings;

    /// Largest |I| over all eight entries.
    double max_abs() const;
    /// Largest |I| over the four drive couplings.
    double max_abs_drive() const;
};

enum class Method { ClosedForm, Quadrature };

/// Tensor Gauss-Legendre over x_r in [0, R] and x_z in [-Z, Z] with a
/// uniform rule in phi. R and Z put the Gaussian tail below `tail`.
struct QuadratureOptions {
    int panels = 16;
    int order = 24;
    int phi_points = 8;
    double tail = 1e-17;
};

inline constexpr double kResidualWarnThreshold = 0.05;
inline constexpr double kExcitableThreshold = 1e-12;

/// Closed-form I_{j,k,l}. Throws InconsistentModeError when the modes were
/// solved at different (g0, lambda), UnsupportedModeError for unknown shapes.
Complex overlap_integral(const modes::ModeSolution& j, const modes::ModeSolution& k,
                         const modes::ModeSolution& l);

/// Same integral by quadrature over mode_function.
Complex overlap_integral_quadrature(const modes::ModeSolution& j, const modes::ModeSolution& k,
                                    const modes::ModeSolution& l, const QuadratureOptions& opts = {});

/// <a|b> in closed form, and by quadrature.
Complex inner_product(const modes::ModeSolution& a, const modes::ModeSolution& b);
Complex inner_product_quadrature(const modes::ModeSolution& a, const modes::ModeSolution& b,
                                 const QuadratureOptions& opts = {});

OverlapTable build_table(const modes::ModePair& pair, Method method = Method::ClosedForm,
                         const QuadratureOptions& opts = {});

struct Excitability {
    bool excitable = false;
    std::string reason;
};

/// Reads only the drive couplings.
Excitability is_excitable(const OverlapTable& table);

/// Pretty JSON with re/im per entry.
std::string to_json(const OverlapTable& table);

}  // namespace becmode::overlaps
