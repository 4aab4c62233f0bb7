#include "becmode/feshbach.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "becmode/errors.hpp"
#include "becmode/units.hpp"

namespace becmode::feshbach {

void FeshbachParams::validate() const
{
    if (!(b_res_gauss > 0.0) || !std::isfinite(b_res_gauss))
        throw ParameterError(fmt::format("{}: B_res must be positive (got {})", species, b_res_gauss));
    if (delta_gauss == 0.0 || !std::isfinite(delta_gauss))
        throw ParameterError(fmt::format("{}: resonance width must be nonzero", species));
    if (a_nr_bohr == 0.0 || !std::isfinite(a_nr_bohr))
        throw ParameterError(fmt::format("{}: background scattering length must be nonzero", species));
    if (mass_number <= 0)
        throw ParameterError(fmt::format("{}: mass number must be positive", species));
}

double scattering_length(const FeshbachParams& params, double field_gauss)
{
    params.validate();
    if (std::isinf(field_gauss))
        return params.a_nr_bohr;
    const double detuning = field_gauss - params.b_res_gauss;
    if (detuning == 0.0)
        throw SingularityError(
            fmt::format("{}: B = B_res = {} G is the resonance pole", params.species, field_gauss));
    return params.a_nr_bohr * (1.0 - params.delta_gauss / detuning);
}

Modulation linearize_modulation(const FeshbachParams& params, double b0_gauss, double b_gauss)
{
    params.validate();
    const double detuning = b0_gauss - params.b_res_gauss;
    if (detuning == 0.0)
        throw SingularityError(fmt::format("{}: bias field sits on the resonance", params.species));
    if (std::abs(b_gauss) >= std::abs(detuning))
        throw ExpansionValidityError(fmt::format(
            "{}: |b| = {} G must stay below |B0 - B_res| = {} G", params.species, std::abs(b_gauss),
            std::abs(detuning)));
    Modulation m;
    m.a0_bohr = params.a_nr_bohr * (1.0 - params.delta_gauss / detuning);
    m.a_bohr = params.a_nr_bohr * b_gauss * params.delta_gauss / (detuning * detuning);
    return m;
}

double field_amplitude_per_ratio(const FeshbachParams& params, double b0_gauss)
{
    params.validate();
    const double detuning = b0_gauss - params.b_res_gauss;
    if (detuning == 0.0)
        throw SingularityError(fmt::format("{}: bias field sits on the resonance", params.species));
    const double a0 = params.a_nr_bohr * (1.0 - params.delta_gauss / detuning);
    return a0 * detuning * detuning / (params.a_nr_bohr * params.delta_gauss);
}

double bias_for_scattering_length(const FeshbachParams& params, double a0_bohr)
{
    params.validate();
    const double rel = 1.0 - a0_bohr / params.a_nr_bohr;
    if (rel == 0.0 || !std::isfinite(a0_bohr))
        throw InfeasiblePlanError(fmt::format(
            "{}: a0 = a_nr = {} a_B is only reached at infinite field", params.species,
            params.a_nr_bohr));
    return params.b_res_gauss + params.delta_gauss / rel;
}

namespace {

// Joint solve of ratio = s f x / (1 - x), x = Delta / (B0 - B_res), with
// b = s f (B0 - B_res) for s = +-1. Returns the bias field.
double joint_bias(const FeshbachParams& params, double ratio, double fraction, int a0_sign)
{
    std::optional<double> best_x;
    for (const int s : {+1, -1}) {
        const double denom = ratio + s * fraction;
        if (denom == 0.0)
            continue;
        const double x = ratio / denom;
        const double a0 = params.a_nr_bohr * (1.0 - x);
        if (x == 0.0 || a0 == 0.0 || (a0 > 0.0) != (a0_sign > 0))
            continue;
        // Prefer the branch farther from resonance.
        if (!best_x || std::abs(x) < std::abs(*best_x))
            best_x = x;
    }
    if (!best_x)
        throw InfeasiblePlanError(fmt::format(
            "{}: no bias field gives a/a0 = {} with |b| = {} |B0 - B_res| and a0 of the requested sign",
            params.species, ratio, fraction));
    return params.b_res_gauss + params.delta_gauss / *best_x;
}

}  // namespace

FieldPlan plan_field(const FeshbachParams& params, const PlanRequest& request)
{
    params.validate();
    if (!(request.target_ratio >= 0.0) || !std::isfinite(request.target_ratio))
        throw ParameterError(fmt::format("target ratio a/a0 must be >= 0 (got {})", request.target_ratio));
    if (request.b_fraction && !(*request.b_fraction > 0.0))
        throw ParameterError(fmt::format("b fraction must be positive (got {})", *request.b_fraction));

    FieldPlan plan;
    plan.omega = request.omega;
    if (request.target_a0_bohr) {
        plan.b0_gauss = bias_for_scattering_length(params, *request.target_a0_bohr);
        const double detuning = plan.b0_gauss - params.b_res_gauss;
        if (request.b_fraction) {
            const double magnitude = *request.b_fraction * std::abs(detuning);
            const double per_ratio = field_amplitude_per_ratio(params, plan.b0_gauss);
            plan.b_gauss = per_ratio >= 0.0 ? magnitude : -magnitude;
        } else {
            plan.b_gauss = request.target_ratio * field_amplitude_per_ratio(params, plan.b0_gauss);
        }
    } else {
        if (!request.b_fraction)
            throw ParameterError("planning without a target a0 needs both a ratio and a b fraction");
        if (request.target_ratio == 0.0)
            throw InfeasiblePlanError("a zero ratio cannot fix the bias field without a target a0");
        plan.b0_gauss = joint_bias(params, request.target_ratio, *request.b_fraction, request.a0_sign);
        plan.b_gauss = request.target_ratio * field_amplitude_per_ratio(params, plan.b0_gauss);
    }

    const double distance = std::abs(plan.b0_gauss - params.b_res_gauss);
    const double fraction = std::abs(plan.b_gauss) / distance;
    if (fraction > kMaxExpansionFraction)
        throw InfeasiblePlanError(fmt::format(
            "{}: required |b| = {:.6g} G exceeds {} |B0 - B_res| = {:.6g} G (first-order expansion bound)",
            params.species, std::abs(plan.b_gauss), kMaxExpansionFraction,
            kMaxExpansionFraction * distance));
    if (fraction > kWarnExpansionFraction * (1.0 + 1e-9))
        plan.warnings.push_back(fmt::format(
            "|b| is {:.3g} of |B0 - B_res|; the first-order expansion degrades above {}", fraction,
            kWarnExpansionFraction));

    const Modulation m = linearize_modulation(params, plan.b0_gauss, plan.b_gauss);
    plan.a0_bohr = m.a0_bohr;
    plan.a_bohr = m.a_bohr;
    return plan;
}

const SpeciesRegistry& builtin_species()
{
    static const SpeciesRegistry registry = [] {
        SpeciesRegistry r;
        r["rb85"] = {"rb85", 155.0, 10.7, -443.0, 85, "Claussen et al. (1996) resonance data"};
        r["rb87"] = {"rb87", 1007.34, 0.17, 100.0, 87, "Marte et al. (2002) resonance data"};
        r["li7"] = {"li7", 735.0, -113.0, -27.5, 7, "Strecker et al. (2002) resonance data"};
        r["k39"] = {"k39", 403.4, -52.0, -23.0, 39, "D'Errico et al. (2007) resonance data"};
        return r;
    }();
    return registry;
}

const FeshbachParams& find_species(const SpeciesRegistry& registry, const std::string& label)
{
    const auto it = registry.find(label);
    if (it == registry.end()) {
        std::string known;
        for (const auto& [name, _] : registry)
            known += (known.empty() ? "" : ", ") + name;
        throw ParameterError(fmt::format("unknown species '{}' (known: {})", label, known));
    }
    return it->second;
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& key, const std::string& value, int line)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw ParameterError(fmt::format("registry line {}: '{}' is not a number for {}", line, value, key));
    return x;
}

}  // namespace

SpeciesRegistry read_species_registry(std::istream& in)
{
    SpeciesRegistry registry;
    FeshbachParams* current = nullptr;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParameterError(fmt::format("registry line {}: unterminated section", line_no));
            const std::string label = trim(line.substr(1, line.size() - 2));
            if (label.empty())
                throw ParameterError(fmt::format("registry line {}: empty species label", line_no));
            current = &registry[label];
            current->species = label;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError(fmt::format("registry line {}: expected key = value", line_no));
        if (!current)
            throw ParameterError(fmt::format("registry line {}: key outside a [species] section", line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "b_res_gauss")
            current->b_res_gauss = parse_number(key, value, line_no);
        else if (key == "delta_gauss")
            current->delta_gauss = parse_number(key, value, line_no);
        else if (key == "a_nr_bohr")
            current->a_nr_bohr = parse_number(key, value, line_no);
        else if (key == "mass_number")
            current->mass_number = static_cast<int>(parse_number(key, value, line_no));
        else if (key == "source")
            current->source = value;
        else
            throw ParameterError(fmt::format("registry line {}: unknown key '{}'", line_no, key));
    }
    for (const auto& [_, p] : registry)
        p.validate();
    return registry;
}

void write_species_registry(std::ostream& out, const SpeciesRegistry& registry)
{
    bool first = true;
    for (const auto& [label, p] : registry) {
        if (!first)
            out << '\n';
        first = false;
        out << '[' << label << "]\n"
            << fmt::format("b_res_gauss = {:.17g}\n", p.b_res_gauss)
            << fmt::format("delta_gauss = {:.17g}\n", p.delta_gauss)
            << fmt::format("a_nr_bohr = {:.17g}\n", p.a_nr_bohr)
            << "mass_number = " << p.mass_number << '\n';
        if (!p.source.empty())
            out << "source = " << p.source << '\n';
    }
}

std::vector<TableRow> species_table(const SpeciesRegistry& registry, double g0, double ratio,
                                    double b_fraction, double omega_r)
{
    if (g0 == 0.0 || !std::isfinite(g0))
        throw ParameterError("species table needs a nonzero coupling g0");
    std::vector<TableRow> rows;
    for (const auto& [label, species] : registry) {
        PlanRequest request;
        request.target_ratio = ratio;
        request.b_fraction = b_fraction;
        request.a0_sign = g0 > 0.0 ? +1 : -1;
        TableRow row{species, plan_field(species, request), 0.0};
        row.atom_count = units::atom_count_for_coupling(
            g0, units::bohr_to_meters(row.plan.a0_bohr), units::species_mass(species.mass_number),
            omega_r);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace becmode::feshbach
