#pragma once

#include <cstdint>

namespace becmode::units {

/// CODATA-2018 values. Fixed; nothing in the library lets callers override
/// them.
struct PhysicalConstants {
    static constexpr double hbar = 1.054571817e-34;           // J s
    static constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
    static constexpr double bohr_radius = 5.29177210903e-11;  // m
    static constexpr double gauss = 1.0e-4;                   // T per G
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

constexpr double bohr_to_meters(double a_bohr) { return a_bohr * PhysicalConstants::bohr_radius; }
constexpr double meters_to_bohr(double a_m) { return a_m / PhysicalConstants::bohr_radius; }
constexpr double hz_to_angular(double f_hz) { return kTwoPi * f_hz; }
constexpr double gauss_to_tesla(double b_gauss) { return b_gauss * PhysicalConstants::gauss; }

/// Species mass from its integer mass number (isotopic corrections ignored).
constexpr double species_mass(int mass_number)
{
    return mass_number * PhysicalConstants::atomic_mass_unit;
}

/// Cylindrically symmetric harmonic trap holding N atoms of mass m0.
struct TrapParams {
    double omega_r = 0.0;  // rad/s
    double omega_z = 0.0;  // rad/s
    std::int64_t atom_count = 0;
    double mass = 0.0;  // kg

    /// Throws ParameterError unless omega_r, omega_z, mass > 0 and N >= 2.
    void validate() const;

    /// omega_z / omega_r
    double lambda() const { return omega_z / omega_r; }

    /// Oscillator length l_r = sqrt(hbar / (m0 omega_r)) in meters.
    double length_scale() const;
};

/// Trap-unit parameters shared by the two-mode and GPE solvers.
struct DimensionlessParams {
    double g0 = 0.0;
    double lambda = 1.0;
    double delta = 0.0;
    double drive_ratio = 0.0;  // a / a0
    double tau_max = 200.0;
    double dtau = 1.0e-3;

    void validate() const;
};

/// l_r for a given species mass and radial frequency.
double oscillator_length(double mass, double omega_r);

/// g0 = 4 pi (N - 1) a0 / l_r with lambda = omega_z / omega_r. a0 in meters,
/// may be negative.
DimensionlessParams to_dimensionless(const TrapParams& trap, double a0);

/// Inverse of the g0 definition: a0 = g0 l_r / (4 pi (N - 1)), meters.
double coupling_to_scattering_length(double g0, const TrapParams& trap);

/// Atom number that yields coupling g0 for scattering length a0 (meters).
/// Real-valued; the Table-1 style planning reports N rather than taking it.
double atom_count_for_coupling(double g0, double a0, double mass, double omega_r);

}  // namespace becmode::units
