#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "becmode/csv.hpp"
#include "becmode/errors.hpp"
#include "becmode/feshbach.hpp"
#include "becmode/gpe.hpp"
#include "becmode/modes.hpp"
#include "becmode/order_parameter.hpp"
#include "becmode/overlaps.hpp"
#include "becmode/svg.hpp"
#include "becmode/twomode.hpp"
#include "becmode/units.hpp"
#include "becmode/version.hpp"

namespace becmode::cli {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Flat "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError(fmt::format("cannot read config file '{}'", path));
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError(fmt::format("{}:{}: expected 'key = value'", path, lineno));
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0)
            key.erase(0, 2);
        kv.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return kv;
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError(fmt::format("cannot open '{}' for writing", path));
    f << content;
    if (!f)
        throw IoError(fmt::format("failed writing '{}'", path));
}

double parse_number(const std::string& text)
{
    const std::string t = trim(text);
    try {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos == t.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ParameterError(fmt::format("'{}' is not a number", text));
}

// Comma-separated numbers or start:stop:step ranges.
std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        if (item.find(':') != std::string::npos) {
            std::vector<double> parts;
            std::stringstream is(item);
            std::string p;
            while (std::getline(is, p, ':'))
                parts.push_back(parse_number(p));
            if (parts.size() != 3)
                throw ParameterError(fmt::format("range '{}' must be start:stop:step", item));
            const auto g = order_parameter::make_grid(parts[0], parts[1], parts[2]);
            out.insert(out.end(), g.begin(), g.end());
        } else {
            out.push_back(parse_number(item));
        }
    }
    return out;
}

// Effective settings of a subcommand as "key = value" lines.
std::vector<std::string> echo(const CLI::App* sub)
{
    std::vector<std::string> lines;
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty())
            continue;
        const std::string& key = opt->get_lnames().front();
        if (key == "help" || key == "config")
            continue;
        std::string value = opt->count() ? opt->results().back() : opt->get_default_str();
        if (opt->get_expected_max() == 0)
            value = opt->count() ? "true" : "false";
        if (value.empty())
            continue;
        lines.push_back(fmt::format("{} = {}", key, value));
    }
    return lines;
}

std::vector<std::string> header(const CLI::App* sub)
{
    std::vector<std::string> h{fmt::format("becmode {} {}", kVersion, sub->get_name())};
    for (auto& l : echo(sub))
        h.push_back(l);
    return h;
}

void write_echo(const std::string& output_path, const CLI::App* sub)
{
    std::string text = fmt::format("# becmode {} {}\n", kVersion, sub->get_name());
    for (const auto& l : echo(sub))
        text += l + "\n";
    write_file(output_path + ".config", text);
}

json warnings_json(const std::vector<std::string>& w)
{
    return json(w);
}

double omega_from(std::optional<double> omega_r, std::optional<double> freq_r)
{
    if (omega_r && freq_r)
        throw ParameterError("give either --omega-r (rad/s) or --freq-r (Hz), not both");
    const double w = omega_r ? *omega_r : units::hz_to_angular(freq_r.value_or(120.0));
    if (!(w > 0.0) || !std::isfinite(w))
        throw ParameterError(fmt::format("radial trap frequency must be positive (got {} rad/s)", w));
    return w;
}

modes::SolveOptions solve_options(const std::string& condition)
{
    modes::SolveOptions o;
    if (condition == "eigenvalue")
        o.condition = modes::OptimizationCondition::EigenvalueStationary;
    else if (condition == "functional")
        o.condition = modes::OptimizationCondition::FunctionalStationary;
    else
        throw ParameterError(fmt::format("--condition must be 'eigenvalue' or 'functional' (got '{}')", condition));
    return o;
}

modes::ModeIndex excited_mode(const std::string& label)
{
    const auto idx = modes::ModeIndex::parse(label);
    if (!idx.supported())
        throw UnsupportedModeError(
            fmt::format("mode {{{}}} is not supported; available: 000, 100, 010, 001", idx.label()));
    return idx;
}

// ---------------------------------------------------------------- modes

struct ModesArgs {
    double g0 = 70.0;
    double lambda = 0.2;
    std::string mode = "100";
    std::string condition = "eigenvalue";
    bool overlaps = false;
    bool printed_exponents = false;
    std::optional<double> freq_r;
    std::string out;
};

json solution_json(const modes::ModeSolution& s)
{
    json j;
    j["n"] = s.index.n;
    j["m"] = s.index.m;
    j["k"] = s.index.k;
    j["u"] = s.u;
    j["v"] = s.v;
    j["energy"] = s.energy;
    j["functional_value"] = s.functional_value;
    j["gradient_norm"] = s.gradient_norm;
    j["iterations"] = s.iterations;
    return j;
}

void run_modes(const ModesArgs& a, const CLI::App* sub, std::ostream& out)
{
    const auto idx = excited_mode(a.mode);
    const auto opts = solve_options(a.condition);
    if (a.freq_r && !(*a.freq_r > 0.0))
        throw ParameterError("--freq-r must be positive");
    json j;
    if (idx == modes::kGround) {
        const auto s = modes::solve_mode(idx, a.g0, a.lambda, opts);
        j = solution_json(s);
        j["omega_p0"] = nullptr;
        j["condition"] = a.condition;
        j["warnings"] = warnings_json(s.warnings);
    } else {
        const auto pair = modes::transition_frequency(a.g0, a.lambda, idx, opts);
        j = solution_json(pair.excited);
        j["omega_p0"] = pair.omega_p0;
        if (a.freq_r)
            j["transition_hz"] = pair.omega_p0 * *a.freq_r;
        j["condition"] = a.condition;
        j["ground"] = solution_json(pair.ground);
        std::vector<std::string> w = pair.ground.warnings;
        if (a.overlaps) {
            modes::ModePair used = pair;
            if (a.printed_exponents)
                used.excited = modes::with_shared_ground_exponents(pair.excited, pair.ground);
            const auto table = overlaps::build_table(used);
            j["overlaps"] = json::parse(overlaps::to_json(table));
            if (a.printed_exponents) {
                j["printed_exponents"] = true;
                j["excited_norm"] = overlaps::inner_product(used.excited, used.excited).real();
                w.insert(w.end(), used.excited.warnings.begin(), used.excited.warnings.end());
            }
        }
        j["warnings"] = warnings_json(w);
    }
    const std::string text = j.dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        write_file(a.out, text);
        write_echo(a.out, sub);
    }
}

// ---------------------------------------------------------------- evolve

struct EvolveArgs {
    double g0 = 70.0;
    double lambda = 0.2;
    double ratio = 1.0;
    double delta = 0.04;
    double tau_max = 200.0;
    double dtau = 1e-3;
    int stride = 100;
    std::string mode = "100";
    std::string out;
    std::string svg;
};

void run_evolve(const EvolveArgs& a, const CLI::App* sub, std::ostream& out, std::ostream& err)
{
    const auto drive = twomode::make_drive(a.g0, a.lambda, a.ratio, a.delta, excited_mode(a.mode));
    const auto traj = twomode::integrate(drive, {a.tau_max, a.dtau, a.stride});
    for (const auto& w : traj.warnings)
        err << "warning: " << w << '\n';

    std::ostringstream csv;
    twomode::write_csv(csv, traj, header(sub));
    json s;
    s["omega_p0"] = drive.omega_p0;
    s["dtau_used"] = traj.dtau;
    s["max_np"] = *std::max_element(traj.np.begin(), traj.np.end());
    s["min_n0"] = *std::min_element(traj.n0.begin(), traj.n0.end());
    s["max_norm_drift"] = traj.max_norm_drift();
    s["warnings"] = warnings_json(traj.warnings);
    if (a.out.empty()) {
        out << csv.str();
    } else {
        write_file(a.out, csv.str());
        write_echo(a.out, sub);
        out << s.dump(2) << '\n';
    }
    if (!a.svg.empty()) {
        svg::Plot p;
        p.title = fmt::format("g0 = {}, lambda = {}, a/a0 = {}, delta = {}", a.g0, a.lambda, a.ratio, a.delta);
        p.x_label = "tau (trap units)";
        p.y_label = "population";
        p.y_range = std::make_pair(0.0, 1.0);
        p.lines.push_back({"n0", traj.tau, traj.n0, false, "#1f3b73"});
        p.lines.push_back({"np", traj.tau, traj.np, true, "#b0302a"});
        write_file(a.svg, svg::render(p));
    }
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    double g0 = 70.0;
    double lambda = 0.2;
    std::string deltas = "0,0.01,0.02,0.03,0.04";
    std::string ratio = "0.5:1.2:0.005";
    double tau_max = 1000.0;
    double dtau = 1e-3;
    int stride = 100;
    int threads = 1;
    double threshold = order_parameter::kStepThreshold;
    std::string mode = "100";
    std::string out;
    std::string summary;
    std::string svg;
    bool quiet = false;
};

void run_sweep(const SweepArgs& a, const CLI::App* sub, std::ostream& out, std::ostream& err)
{
    const auto deltas = parse_list(a.deltas);
    const auto grid = parse_list(a.ratio);
    if (deltas.empty())
        throw ParameterError("--deltas is empty");
    if (grid.empty())
        throw ParameterError("--ratio grid is empty");
    if (!(a.threshold > 0.0))
        throw ParameterError("--threshold must be positive");
    order_parameter::SweepOptions o;
    o.integrate = {a.tau_max, a.dtau, a.stride};
    o.excited = excited_mode(a.mode);
    o.threads = a.threads;
    std::size_t last_pct = 0;
    if (!a.quiet)
        o.progress = [&](std::size_t done, std::size_t total) {
            const std::size_t pct = done * 20 / total;
            if (pct != last_pct || done == total) {
                last_pct = pct;
                err << fmt::format("sweep: {}/{} points\n", done, total);
            }
        };
    const auto curves = order_parameter::sweep(a.g0, a.lambda, deltas, grid, o);

    std::ostringstream csv;
    order_parameter::write_csv(csv, curves, header(sub));
    const std::string summary = order_parameter::summary_json(curves, a.threshold) + "\n";
    if (a.out.empty()) {
        out << csv.str();
    } else {
        write_file(a.out, csv.str());
        write_echo(a.out, sub);
    }
    if (!a.summary.empty()) {
        write_file(a.summary, summary);
        write_echo(a.summary, sub);
    } else if (!a.out.empty()) {
        out << summary;
    } else {
        err << summary;
    }
    if (!a.svg.empty()) {
        static const char* palette[] = {"#1f3b73", "#b0302a", "#2a7a3b", "#8a5a00", "#6b2c91", "#00707a"};
        svg::Plot p;
        p.title = fmt::format("order parameter, g0 = {}, lambda = {}", a.g0, a.lambda);
        p.x_label = "a/a0";
        p.y_label = "eta";
        p.y_range = std::make_pair(-1.0, 1.0);
        for (std::size_t c = 0; c < curves.size(); ++c) {
            svg::Line l;
            l.label = fmt::format("delta = {}", curves[c].delta);
            l.color = palette[c % 6];
            l.dashed = c >= 6;
            for (const auto& pt : curves[c].points) {
                l.x.push_back(pt.ratio);
                l.y.push_back(pt.eta);
            }
            p.lines.push_back(std::move(l));
        }
        write_file(a.svg, svg::render(p));
    }
}

// ---------------------------------------------------------------- feshbach

struct FeshbachArgs {
    std::string species = "li7";
    std::string registry;
    std::string write_registry;
    double g0 = 70.0;
    double lambda = 0.2;
    double ratio = 0.8;
    double delta = 0.0;
    std::optional<double> b_fraction;
    std::optional<double> target_a0;
    std::optional<double> atoms;
    std::optional<double> omega_r;
    std::optional<double> freq_r;
    bool table = false;
    std::string out;
};

void run_feshbach(const FeshbachArgs& a, const CLI::App* sub, std::ostream& out)
{
    feshbach::SpeciesRegistry registry = feshbach::builtin_species();
    if (!a.registry.empty()) {
        std::ifstream in(a.registry);
        if (!in)
            throw IoError(fmt::format("cannot read species registry '{}'", a.registry));
        registry = feshbach::read_species_registry(in);
    }
    if (!a.write_registry.empty()) {
        std::ostringstream s;
        feshbach::write_species_registry(s, registry);
        write_file(a.write_registry, s.str());
        return;
    }
    const double omega_r = omega_from(a.omega_r, a.freq_r);

    std::string text;
    if (a.table) {
        const auto rows = feshbach::species_table(registry, a.g0, a.ratio, a.b_fraction.value_or(0.1), omega_r);
        std::ostringstream s;
        auto h = header(sub);
        for (const auto& r : rows)
            for (const auto& w : r.plan.warnings)
                h.push_back(fmt::format("warning {}: {}", r.species.species, w));
        csv::write_comments(s, h);
        s << "species,b0_gauss,b_gauss,a0_bohr,a_bohr,ratio,atom_count,b_per_ratio\n";
        for (const auto& r : rows)
            s << r.species.species << ',' << csv::number(r.plan.b0_gauss) << ',' << csv::number(r.plan.b_gauss)
              << ',' << csv::number(r.plan.a0_bohr) << ',' << csv::number(r.plan.a_bohr) << ','
              << csv::number(r.plan.ratio()) << ',' << csv::number(r.atom_count) << ','
              << csv::number(feshbach::field_amplitude_per_ratio(r.species, r.plan.b0_gauss)) << '\n';
        text = s.str();
    } else {
        const auto& sp = feshbach::find_species(registry, a.species);
        const double mass = units::species_mass(sp.mass_number);
        feshbach::PlanRequest req;
        req.target_ratio = a.ratio;
        req.b_fraction = a.b_fraction;
        if (!a.target_a0 && !a.atoms && !a.b_fraction)
            req.b_fraction = 0.1;
        req.a0_sign = a.g0 >= 0.0 ? +1 : -1;
        if (a.target_a0 && a.atoms)
            throw ParameterError("give either --target-a0 or --atoms, not both");
        if (a.target_a0) {
            req.target_a0_bohr = *a.target_a0;
        } else if (a.atoms) {
            units::TrapParams trap;
            trap.omega_r = omega_r;
            trap.omega_z = omega_r * a.lambda;
            trap.atom_count = static_cast<std::int64_t>(std::llround(*a.atoms));
            trap.mass = mass;
            req.target_a0_bohr = units::meters_to_bohr(units::coupling_to_scattering_length(a.g0, trap));
        }
        const auto pair = modes::transition_frequency(a.g0, a.lambda, modes::kRadialDipole);
        req.omega = (pair.omega_p0 + a.delta) * omega_r;
        const auto plan = feshbach::plan_field(sp, req);
        const double atoms =
            a.atoms ? *a.atoms
                    : units::atom_count_for_coupling(a.g0, units::bohr_to_meters(plan.a0_bohr), mass, omega_r);
        json j;
        j["species"] = sp.species;
        j["b_res_gauss"] = sp.b_res_gauss;
        j["delta_gauss"] = sp.delta_gauss;
        j["a_nr_bohr"] = sp.a_nr_bohr;
        j["b0_gauss"] = plan.b0_gauss;
        j["b_gauss"] = plan.b_gauss;
        j["b_per_ratio"] = feshbach::field_amplitude_per_ratio(sp, plan.b0_gauss);
        j["a0_bohr"] = plan.a0_bohr;
        j["a_bohr"] = plan.a_bohr;
        j["ratio"] = plan.ratio();
        j["atom_count"] = atoms;
        j["g0"] = a.g0;
        j["lambda"] = a.lambda;
        j["omega_r"] = omega_r;
        j["omega_modulation"] = plan.omega;
        j["modulation_hz"] = plan.omega / units::kTwoPi;
        j["warnings"] = warnings_json(plan.warnings);
        text = j.dump(2) + "\n";
    }
    if (a.out.empty()) {
        out << text;
    } else {
        write_file(a.out, text);
        write_echo(a.out, sub);
    }
}

// ---------------------------------------------------------------- gpe

struct GpeArgs {
    double g0 = 70.0;
    double lambda = 0.2;
    double ratio = 0.0;
    double delta = 0.0;
    std::optional<double> omega_drive;
    double tau_max = 50.0;
    double dt = 5e-4;
    double sample = 0.1;
    int nr = 256;
    int nz = 512;
    double r_max = 8.0;
    double z_max = 24.0;
    double gs_dtau = 0.1;
    bool compare = false;
    std::string twomode_csv;
    std::string out;
    std::string report;
    std::string snapshot;
    std::string svg;
};

void run_gpe(const GpeArgs& a, const CLI::App* sub, std::ostream& out, std::ostream& err)
{
    const gpe::Grid2D grid{a.nr, a.nz, a.r_max, a.z_max};
    grid.validate();
    if (!(a.tau_max > 0.0) || !(a.dt > 0.0) || !(a.sample > 0.0))
        throw ParameterError("--tau-max, --dt and --sample must be positive");
    if (!(a.ratio >= 0.0))
        throw ParameterError("--ratio must be >= 0");
    const auto pair = modes::transition_frequency(a.g0, a.lambda, modes::kRadialDipole);
    const double omega_drive = a.omega_drive.value_or(pair.omega_p0 + a.delta);

    gpe::GroundStateOptions gso;
    gso.dtau = a.gs_dtau;
    const auto gs = gpe::ground_state(a.g0, a.lambda, grid, gso);
    const gpe::Discretization disc(grid, a.lambda);
    const auto basis = gpe::projection_basis(disc, gs.state, a.g0);
    const double ansatz_overlap = std::norm(disc.inner(basis.ground, gs.state.psi));
    modes::SolveOptions fo;
    fo.condition = modes::OptimizationCondition::FunctionalStationary;
    const double bound = modes::solve_mode(modes::kGround, a.g0, a.lambda, fo).functional_value;

    gpe::PropagateOptions po;
    po.g0 = a.g0;
    po.lambda = a.lambda;
    po.ratio = a.ratio;
    po.omega_drive = omega_drive;
    po.tau_max = a.tau_max;
    po.dt = a.dt;
    po.sample_interval = a.sample;
    gpe::FieldState final_state;
    const auto series = gpe::propagate(gs.state, basis, po, &final_state);

    json r;
    r["ground_state"] = {{"energy", gs.energy},
                         {"chemical_potential", gs.chemical_potential},
                         {"steps", gs.steps},
                         {"residual", gs.residual},
                         {"ansatz_overlap", ansatz_overlap},
                         {"functional_bound", bound},
                         {"below_bound", gs.energy <= bound}};
    r["omega_p0"] = pair.omega_p0;
    r["omega_drive"] = omega_drive;
    double drift = 0.0;
    for (double n : series.norm)
        drift = std::max(drift, std::abs(n - series.norm.front()));
    const auto [lo, hi] = std::minmax_element(series.n000.begin(), series.n000.end());
    r["max_norm_drift"] = drift;
    r["n000_range"] = *hi - *lo;
    std::vector<std::string> warnings = gs.warnings;

    std::vector<double> ref_tau;
    std::vector<double> ref_np;
    if (a.compare || !a.twomode_csv.empty()) {
        if (!a.twomode_csv.empty()) {
            std::ifstream in(a.twomode_csv);
            if (!in)
                throw IoError(fmt::format("cannot read two-mode CSV '{}'", a.twomode_csv));
            const auto t = csv::read(in);
            ref_tau = t.values("tau");
            ref_np = t.values("np");
        } else {
            const auto drive = twomode::make_drive(a.g0, a.lambda, a.ratio, omega_drive - pair.omega_p0);
            const int stride = std::max(1, static_cast<int>(std::lround(a.sample / 1e-3)));
            const auto traj = twomode::integrate(drive, {a.tau_max, 1e-3, stride});
            ref_tau = traj.tau;
            ref_np = traj.np;
            warnings.insert(warnings.end(), traj.warnings.begin(), traj.warnings.end());
        }
        const auto c = gpe::compare_series(series.tau, series.n100, ref_tau, ref_np, units::kTwoPi / omega_drive);
        r["comparison"] = json::parse(gpe::to_json(c));
    }
    r["warnings"] = warnings_json(warnings);
    for (const auto& w : warnings)
        err << "warning: " << w << '\n';

    std::ostringstream csv;
    gpe::write_series_csv(csv, series, header(sub));
    const std::string report = r.dump(2) + "\n";
    if (a.out.empty()) {
        out << csv.str();
    } else {
        write_file(a.out, csv.str());
        write_echo(a.out, sub);
    }
    if (!a.report.empty()) {
        write_file(a.report, report);
        write_echo(a.report, sub);
    } else if (!a.out.empty()) {
        out << report;
    } else {
        err << report;
    }
    if (!a.snapshot.empty()) {
        std::ostringstream m;
        std::ostringstream side;
        gpe::write_snapshot(m, side, final_state);
        write_file(a.snapshot, m.str());
        write_file(a.snapshot + ".json", side.str());
    }
    if (!a.svg.empty()) {
        svg::Plot p;
        p.title = fmt::format("GPE, g0 = {}, lambda = {}, a/a0 = {}", a.g0, a.lambda, a.ratio);
        p.x_label = "tau (trap units)";
        p.y_label = "population";
        p.lines.push_back({"n000", series.tau, series.n000, false, "#1f3b73"});
        p.lines.push_back({"n100", series.tau, series.n100, true, "#b0302a"});
        if (!ref_tau.empty())
            p.lines.push_back({"np two-mode", ref_tau, ref_np, true, "#2a7a3b"});
        write_file(a.svg, svg::render(p));
    }
}

// Pulls "--config FILE" out of args.
std::optional<std::string> take_config(std::vector<std::string>& args)
{
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw ParameterError("--config needs a file name");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    return path;
}

// Config entries become flags placed right after the subcommand name, so
// flags given on the command line (parsed later, last one wins) override them.
void merge_config(CLI::App& app, std::vector<std::string>& args, const std::string& path)
{
    const auto kv = read_config(path);
    auto it = std::find_if(args.begin(), args.end(), [](const std::string& s) { return !s.empty() && s[0] != '-'; });
    if (it == args.end())
        throw ParameterError("a config file needs a subcommand");
    CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(*it);
    } catch (const CLI::OptionNotFound&) {
        throw ParameterError(fmt::format("unknown subcommand '{}'", *it));
    }
    std::vector<std::string> injected;
    for (const auto& [key, value] : kv) {
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt || key == "help" || key == "config")
            throw ParameterError(fmt::format("{}: unknown key '{}' for '{}'", path, key, sub->get_name()));
        if (opt->get_expected_max() == 0) {
            if (value == "true" || value == "1" || value == "yes")
                injected.push_back("--" + key);
            else if (!(value == "false" || value == "0" || value == "no"))
                throw ParameterError(fmt::format("{}: '{}' expects true or false", path, key));
        } else {
            injected.push_back("--" + key);
            injected.push_back(value);
        }
    }
    args.insert(it + 1, injected.begin(), injected.end());
}

int exit_code(const Error& e)
{
    if (dynamic_cast<const ParameterError*>(&e))
        return 2;
    if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const NumericalInstabilityError*>(&e))
        return 3;
    if (dynamic_cast<const IoError*>(&e))
        return 4;
    return 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Transfer of a trapped condensate into a nonlinear coherent mode by modulated scattering length",
                 "becmode"};
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    const std::string config_help = "Flat 'key = value' file with flag names as keys; command-line flags win";
    std::string unused_config;

    ModesArgs ma;
    auto* modes_cmd = app.add_subcommand("modes", "Solve the optimized Gaussian modes and the transition frequency");
    modes_cmd->add_option("--config", unused_config, config_help);
    modes_cmd->add_option("--g0", ma.g0, "Coupling g0 = 4 pi (N-1) a0 / l_r (trap units)");
    modes_cmd->add_option("--lambda", ma.lambda, "Aspect ratio omega_z / omega_r (dimensionless)");
    modes_cmd->add_option("--mode", ma.mode, "Mode label nmk: 000, 100, 010 or 001");
    modes_cmd->add_option("--condition", ma.condition, "Width condition: eigenvalue (default) or functional");
    modes_cmd->add_flag("--overlaps", ma.overlaps, "Include the overlap table of the (000, mode) pair");
    modes_cmd->add_flag("--printed-exponents", ma.printed_exponents,
                        "Overlaps with the ground-state widths in the excited exponent");
    modes_cmd->add_option("--freq-r", ma.freq_r, "Radial trap frequency (Hz); adds the transition in Hz");
    modes_cmd->add_option("--out", ma.out, "JSON output file (default stdout)");

    EvolveArgs ea;
    auto* evolve_cmd = app.add_subcommand("evolve", "Integrate the two-mode amplitude equations");
    evolve_cmd->add_option("--config", unused_config, config_help);
    evolve_cmd->add_option("--g0", ea.g0, "Coupling g0 (trap units)");
    evolve_cmd->add_option("--lambda", ea.lambda, "Aspect ratio omega_z / omega_r (dimensionless)");
    evolve_cmd->add_option("--ratio", ea.ratio, "Modulation ratio a/a0 (dimensionless, >= 0)");
    evolve_cmd->add_option("--delta", ea.delta, "Detuning (omega - omega_p0) / omega_r (trap units)");
    evolve_cmd->add_option("--tau-max", ea.tau_max, "Time horizon (units of 1/omega_r)");
    evolve_cmd->add_option("--dtau", ea.dtau, "RK4 step (units of 1/omega_r)");
    evolve_cmd->add_option("--stride", ea.stride, "Steps between samples");
    evolve_cmd->add_option("--mode", ea.mode, "Excited mode label (default 100)");
    evolve_cmd->add_option("--out", ea.out, "Trajectory CSV (default stdout)");
    evolve_cmd->add_option("--svg", ea.svg, "Population plot (SVG)");

    SweepArgs sa;
    sa.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* sweep_cmd = app.add_subcommand("sweep", "Order parameter eta over ratio and detuning grids");
    sweep_cmd->add_option("--config", unused_config, config_help);
    sweep_cmd->add_option("--g0", sa.g0, "Coupling g0 (trap units)");
    sweep_cmd->add_option("--lambda", sa.lambda, "Aspect ratio (dimensionless)");
    sweep_cmd->add_option("--deltas", sa.deltas, "Detunings, comma list or start:stop:step (trap units)");
    sweep_cmd->add_option("--ratio", sa.ratio, "Ratio grid a/a0, comma list or start:stop:step");
    sweep_cmd->add_option("--tau-max", sa.tau_max, "Time horizon per point (units of 1/omega_r)");
    sweep_cmd->add_option("--dtau", sa.dtau, "RK4 step (units of 1/omega_r)");
    sweep_cmd->add_option("--stride", sa.stride, "Steps between samples");
    sweep_cmd->add_option("--threads", sa.threads, "Worker threads");
    sweep_cmd->add_option("--threshold", sa.threshold, "Step threshold on adjacent eta jumps");
    sweep_cmd->add_option("--mode", sa.mode, "Excited mode label (default 100)");
    sweep_cmd->add_option("--out", sa.out, "Sweep CSV (default stdout)");
    sweep_cmd->add_option("--summary", sa.summary, "Per-curve summary JSON");
    sweep_cmd->add_option("--svg", sa.svg, "Plot of eta against a/a0 (SVG)");
    sweep_cmd->add_flag("--quiet", sa.quiet, "No progress lines");

    FeshbachArgs fa;
    auto* fesh_cmd = app.add_subcommand("feshbach", "Plan bias and modulation fields near a Feshbach resonance");
    fesh_cmd->add_option("--config", unused_config, config_help);
    fesh_cmd->add_option("--species", fa.species, "Species label (rb85, rb87, li7, k39 or from --registry)");
    fesh_cmd->add_option("--registry", fa.registry, "Species registry file (key-value sections)");
    fesh_cmd->add_option("--write-registry", fa.write_registry, "Write the registry to this file and exit");
    fesh_cmd->add_option("--g0", fa.g0, "Coupling g0 (trap units)");
    fesh_cmd->add_option("--lambda", fa.lambda, "Aspect ratio (dimensionless)");
    fesh_cmd->add_option("--ratio", fa.ratio, "Modulation ratio a/a0 (dimensionless)");
    fesh_cmd->add_option("--delta", fa.delta, "Detuning for the modulation frequency (trap units)");
    fesh_cmd->add_option("--b-fraction", fa.b_fraction, "Rule |b| = f |B_res - B0| (dimensionless)");
    fesh_cmd->add_option("--target-a0", fa.target_a0, "Mean scattering length (Bohr radii)");
    fesh_cmd->add_option("--atoms", fa.atoms, "Atom number N; fixes a0 from g0");
    fesh_cmd->add_option("--omega-r", fa.omega_r, "Radial trap angular frequency (rad/s)");
    fesh_cmd->add_option("--freq-r", fa.freq_r, "Radial trap frequency (Hz, default 120)");
    fesh_cmd->add_flag("--table", fa.table, "Plan every registry species (CSV)");
    fesh_cmd->add_option("--out", fa.out, "Output file (default stdout)");

    GpeArgs ga;
    auto* gpe_cmd = app.add_subcommand("gpe", "Direct m = 0 Gross-Pitaevskii propagation with projections");
    gpe_cmd->add_option("--config", unused_config, config_help);
    gpe_cmd->add_option("--g0", ga.g0, "Coupling g0 (trap units)");
    gpe_cmd->add_option("--lambda", ga.lambda, "Aspect ratio (dimensionless)");
    gpe_cmd->add_option("--ratio", ga.ratio, "Modulation ratio a/a0 (dimensionless)");
    gpe_cmd->add_option("--delta", ga.delta, "Drive detuning from omega_p0 (trap units)");
    gpe_cmd->add_option("--omega-drive", ga.omega_drive, "Drive frequency, overrides --delta (units of omega_r)");
    gpe_cmd->add_option("--tau-max", ga.tau_max, "Time horizon (units of 1/omega_r)");
    gpe_cmd->add_option("--dt", ga.dt, "Time step (units of 1/omega_r)");
    gpe_cmd->add_option("--sample", ga.sample, "Sampling interval (units of 1/omega_r)");
    gpe_cmd->add_option("--nr", ga.nr, "Radial cells");
    gpe_cmd->add_option("--nz", ga.nz, "Axial cells");
    gpe_cmd->add_option("--r-max", ga.r_max, "Radial extent (units of l_r)");
    gpe_cmd->add_option("--z-max", ga.z_max, "Axial half extent (units of l_r)");
    gpe_cmd->add_option("--gs-dtau", ga.gs_dtau, "Imaginary-time step for the ground state (units of 1/omega_r)");
    gpe_cmd->add_flag("--compare", ga.compare, "Compare n100 with the two-mode model at the same parameters");
    gpe_cmd->add_option("--twomode-csv", ga.twomode_csv, "Compare against an evolve CSV instead");
    gpe_cmd->add_option("--out", ga.out, "Series CSV (default stdout)");
    gpe_cmd->add_option("--report", ga.report, "Report JSON");
    gpe_cmd->add_option("--snapshot", ga.snapshot, "Final |psi|^2 as CSV matrix plus .json sidecar");
    gpe_cmd->add_option("--svg", ga.svg, "Population plot (SVG)");

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);

    try {
        if (const auto path = take_config(args))
            merge_config(app, args, *path);
        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::CallForHelp&) {
            out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::CallForVersion&) {
            out << kVersion << '\n';
            return 0;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        }

        if (modes_cmd->parsed())
            run_modes(ma, modes_cmd, out);
        else if (evolve_cmd->parsed())
            run_evolve(ea, evolve_cmd, out, err);
        else if (sweep_cmd->parsed())
            run_sweep(sa, sweep_cmd, out, err);
        else if (fesh_cmd->parsed())
            run_feshbach(fa, fesh_cmd, out);
        else if (gpe_cmd->parsed())
            run_gpe(ga, gpe_cmd, out, err);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace becmode::cli
