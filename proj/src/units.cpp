#include "becmode/units.hpp"

#include <cmath>

#include <fmt/format.h>

#include "becmode/errors.hpp"

namespace becmode::units {

void TrapParams::validate() const
{
    if (!(omega_r > 0.0) || !std::isfinite(omega_r))
        throw ParameterError(fmt::format("omega_r must be positive and finite (got {})", omega_r));
    if (!(omega_z > 0.0) || !std::isfinite(omega_z))
        throw ParameterError(fmt::format("omega_z must be positive and finite (got {})", omega_z));
    if (atom_count < 2)
        throw ParameterError(fmt::format("atom count must be at least 2 (got {})", atom_count));
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw ParameterError(fmt::format("species mass must be positive (got {})", mass));
}

double TrapParams::length_scale() const
{
    return oscillator_length(mass, omega_r);
}

void DimensionlessParams::validate() const
{
    if (!std::isfinite(g0))
        throw ParameterError("g0 must be finite");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ParameterError(fmt::format("lambda must be positive (got {})", lambda));
    if (!(drive_ratio >= 0.0) || !std::isfinite(drive_ratio))
        throw ParameterError(fmt::format("drive ratio a/a0 must be >= 0 (got {})", drive_ratio));
    if (!(dtau > 0.0))
        throw ParameterError(fmt::format("dtau must be positive (got {})", dtau));
    if (!(tau_max > 0.0))
        throw ParameterError(fmt::format("tau_max must be positive (got {})", tau_max));
    if (!std::isfinite(delta))
        throw ParameterError("detuning must be finite");
}

double oscillator_length(double mass, double omega_r)
{
    if (!(mass > 0.0) || !(omega_r > 0.0))
        throw ParameterError("oscillator length needs positive mass and omega_r");
    return std::sqrt(PhysicalConstants::hbar / (mass * omega_r));
}

DimensionlessParams to_dimensionless(const TrapParams& trap, double a0)
{
    trap.validate();
    if (!std::isfinite(a0))
        throw ParameterError("scattering length must be finite");
    DimensionlessParams p;
    p.g0 = 4.0 * kPi * static_cast<double>(trap.atom_count - 1) * a0 / trap.length_scale();
    p.lambda = trap.lambda();
    return p;
}

double coupling_to_scattering_length(double g0, const TrapParams& trap)
{
    trap.validate();
    if (!std::isfinite(g0))
        throw ParameterError("g0 must be finite");
    return g0 * trap.length_scale() / (4.0 * kPi * static_cast<double>(trap.atom_count - 1));
}

double atom_count_for_coupling(double g0, double a0, double mass, double omega_r)
{
    if (a0 == 0.0 || !std::isfinite(a0))
        throw ParameterError("cannot infer atom count from a zero scattering length");
    const double n_minus_one = g0 * oscillator_length(mass, omega_r) / (4.0 * kPi * a0);
    if (!(n_minus_one >= 1.0))
        throw ParameterError(
            fmt::format("g0 = {} and a0 = {} m imply fewer than two atoms", g0, a0));
    return n_minus_one + 1.0;
}

}  // namespace becmode::units
