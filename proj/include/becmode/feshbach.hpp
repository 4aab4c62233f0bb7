#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace becmode::feshbach {

/// Single isolated resonance a_s(B) = a_nr (1 - Delta / (B - B_res)).
/// Delta and a_nr keep their published signs.
struct FeshbachParams {
    std::string species;
    double b_res_gauss = 0.0;
    double delta_gauss = 0.0;
    double a_nr_bohr = 0.0;
    int mass_number = 0;
    std::string source;

    void validate() const;
};

/// Static bias plus oscillating component, and the scattering-length
/// modulation it produces to first order.
struct FieldPlan {
    double b0_gauss = 0.0;
    double b_gauss = 0.0;
    double omega = 0.0;  // rad/s, modulation frequency (0 when not planned)
    double a0_bohr = 0.0;
    double a_bohr = 0.0;
    std::vector<std::string> warnings;

    double ratio() const { return a_bohr / a0_bohr; }
};

struct Modulation {
    double a0_bohr = 0.0;
    double a_bohr = 0.0;
};

/// |b| above this fraction of |B0 - B_res| is rejected; above the warn
/// fraction the plan carries a warning.
inline constexpr double kMaxExpansionFraction = 0.2;
inline constexpr double kWarnExpansionFraction = 0.1;

/// a_s(B) in Bohr radii. Throws SingularityError at B = B_res.
double scattering_length(const FeshbachParams& params, double field_gauss);

/// First-order expansion of a_s(B0 + b cos wt) about B0. Throws
/// ExpansionValidityError when |b| >= |B0 - B_res|.
Modulation linearize_modulation(const FeshbachParams& params, double b0_gauss, double b_gauss);

/// Oscillation amplitude b (G) that yields a/a0 = 1 at bias B0; b scales
/// linearly with the requested ratio.
double field_amplitude_per_ratio(const FeshbachParams& params, double b0_gauss);

/// Bias field that puts the mean scattering length at a0.
double bias_for_scattering_length(const FeshbachParams& params, double a0_bohr);

struct PlanRequest {
    /// Mean scattering length to hit. When absent, a0 is solved jointly
    /// from target_ratio and b_fraction (the Table-1 construction).
    std::optional<double> target_a0_bohr;
    double target_ratio = 0.0;
    /// |b| = fraction * |B_res - B0|, sign chosen so that a/a0 >= 0.
    std::optional<double> b_fraction;
    /// Sign of a0 wanted in the joint solve (+1 repulsive, -1 attractive).
    int a0_sign = +1;
    double omega = 0.0;
};

/// Plan B0 and b for the requested modulation. Throws InfeasiblePlanError
/// when the requested point sits on a pole or violates the expansion bound.
FieldPlan plan_field(const FeshbachParams& params, const PlanRequest& request);

/// Species registry keyed by short label ("li7", "rb85", ...).
using SpeciesRegistry = std::map<std::string, FeshbachParams>;

/// Resonance data for 85Rb, 87Rb, 7Li and 39K.
const SpeciesRegistry& builtin_species();

/// Lookup in a registry; ParameterError naming the known labels on miss.
const FeshbachParams& find_species(const SpeciesRegistry& registry, const std::string& label);

/// INI-like key-value format:
///
///   [li7]
///   b_res_gauss = 735
///   delta_gauss = -113
///   a_nr_bohr = -27.5
///   mass_number = 7
///   source = ...
SpeciesRegistry read_species_registry(std::istream& in);
void write_species_registry(std::ostream& out, const SpeciesRegistry& registry);

/// One row of the species planning table: the plan plus the atom number
/// that realises the requested g0 at the planned a0.
struct TableRow {
    FeshbachParams species;
    FieldPlan plan;
    double atom_count = 0.0;
};

/// Plan every species for coupling g0 at modulation ratio and fraction rule,
/// trap radial frequency omega_r (rad/s).
std::vector<TableRow> species_table(const SpeciesRegistry& registry, double g0, double ratio,
                                    double b_fraction, double omega_r);

}  // namespace becmode::feshbach
