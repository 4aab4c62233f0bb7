// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any criterion fails.
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/core.h>
#include <json.hpp>

#include "becmode/csv.hpp"
#include "becmode/gpe.hpp"
#include "becmode/modes.hpp"
#include "becmode/order_parameter.hpp"
#include "becmode/overlaps.hpp"
#include "becmode/twomode.hpp"
#include "becmode/units.hpp"
#include "cli.hpp"

using namespace becmode;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        notes.push_back((ok ? "" : "FAILED ") + what);
    }
};

std::string run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "becmode");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0)
        throw std::runtime_error("becmode exited with " + std::to_string(code) + ": " + err.str());
    return out.str();
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

Outcome transition_frequency()
{
    Outcome o;
    const auto j = json::parse(run_cli({"modes", "--g0", "70", "--lambda", "0.2"}));
    const double w = j["omega_p0"].get<double>();
    const double target = 209.6 / 120.0;
    o.check(within(w, target, 0.05), fmt::format("omega_p0 = {:.6f} vs {:.4f} ({:+.2f}%)", w, target, 100 * (w / target - 1)));
    return o;
}

Outcome species_table()
{
    struct Row {
        double b0, b, a0, n;
    };
    const std::map<std::string, Row> printed{{"rb85", {164.4, -0.9, 63.0, 0.2e4}},
                                             {"rb87", {1007.53, 0.02, 11.0, 0.9e4}},
                                             {"li7", {636.0, 10.0, 3.9, 9.3e4}},
                                             {"k39", {357.9, 4.55, 3.3, 4.7e4}}};
    Outcome o;
    const std::string text = run_cli({"feshbach", "--table"});
    std::istringstream in(text);
    const auto t = csv::read(in);
    std::vector<std::string> labels;
    {
        std::istringstream lines(text);
        std::string line;
        bool header = true;
        while (std::getline(lines, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            if (!std::exchange(header, false))
                labels.push_back(line.substr(0, line.find(',')));
        }
    }
    o.check(t.rows.size() == printed.size(), fmt::format("{} rows", t.rows.size()));
    const auto b0 = t.values("b0_gauss");
    const auto b = t.values("b_gauss");
    const auto a0 = t.values("a0_bohr");
    const auto n = t.values("atom_count");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string& species = labels.at(i);
        const auto& p = printed.at(species);
        const auto cell = [&](const char* name, double got, double want) {
            o.check(within(got, want, 0.05),
                    fmt::format("{} {} = {:.4g} vs {:.4g} ({:+.1f}%)", species, name, got, want, 100 * (got / want - 1)));
        };
        cell("B0", b0[i], p.b0);
        cell("b", b[i], p.b);
        cell("a0", a0[i], p.a0);
        cell("N", n[i], p.n);
        if (species == "li7") {
            o.check(std::abs(b0[i] - 636.0) <= 7.0 && std::abs(b[i] - 10.0) <= 0.5 && std::abs(a0[i] - 3.9) <= 0.2 &&
                        std::abs(n[i] - 9.3e4) <= 0.5e4,
                    "li7 absolute bands");
        }
    }
    return o;
}

Outcome worked_example()
{
    Outcome o;
    const auto j = json::parse(
        run_cli({"feshbach", "--species", "li7", "--atoms", "100000", "--ratio", "1", "--freq-r", "120"}));
    const double per = j["b_per_ratio"].get<double>();
    const double b0 = j["b0_gauss"].get<double>();
    o.check(within(per, 11.68, 0.01), fmt::format("b per ratio = {:.4f} vs 11.68", per));
    o.check(b0 >= 632.5 * 0.99 && b0 <= 636.0 * 1.01, fmt::format("B0 = {:.3f} G vs 632.5-636 band", b0));
    return o;
}

Outcome dynamics()
{
    Outcome o;
    const auto a = twomode::integrate(twomode::make_drive(70.0, 0.2, 0.7, 0.0));
    const double a_np = *std::max_element(a.np.begin(), a.np.end());
    const double a_n0 = *std::min_element(a.n0.begin(), a.n0.end());
    o.check(a_np <= 0.5 && a_n0 >= 0.5, fmt::format("(a) max np = {:.4f}, min n0 = {:.4f}", a_np, a_n0));
    const auto d = twomode::integrate(twomode::make_drive(70.0, 0.2, 1.0, 0.04));
    const double d_np = *std::max_element(d.np.begin(), d.np.end());
    o.check(d_np >= 0.95, fmt::format("(d) max np = {:.4f}", d_np));
    return o;
}

Outcome sweep()
{
    Outcome o;
    order_parameter::SweepOptions opts;
    opts.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::vector<double> deltas{0.0, 0.02, 0.03, 0.04};
    const auto curves = order_parameter::sweep(70.0, 0.2, deltas, order_parameter::make_grid(0.5, 1.2, 0.005), opts);

    const auto& flat = curves[0];
    o.check(order_parameter::classify_transition(flat) == order_parameter::Transition::Smooth,
            fmt::format("delta 0: {} (max jump {:.3f})", order_parameter::to_string(order_parameter::classify_transition(flat)),
                        flat.max_jump));

    const auto& step = curves[3];
    const bool is_step = order_parameter::classify_transition(step) == order_parameter::Transition::Step;
    double min_beyond = 1.0;
    if (step.critical_ratio)
        for (const auto& p : step.points)
            if (p.ratio > *step.critical_ratio)
                min_beyond = std::min(min_beyond, p.eta);
    o.check(is_step && step.critical_ratio && min_beyond < 0.0,
            fmt::format("delta 0.04: {} at {:.3f}, min eta beyond = {:.3f}",
                        order_parameter::to_string(order_parameter::classify_transition(step)), step.max_jump_at,
                        min_beyond));

    std::vector<double> crit;
    std::string listing;
    for (std::size_t i = 1; i < curves.size(); ++i) {
        crit.push_back(curves[i].critical_ratio.value_or(NAN));
        listing += fmt::format(" {}:{:.3f}", deltas[i], crit.back());
    }
    const bool increasing = crit[0] < crit[1] && crit[1] < crit[2];
    o.check(increasing, "critical ratio increases with delta," + listing);
    return o;
}

Outcome properties()
{
    Outcome o;
    double drift = 0.0;
    for (double ratio : {0.7, 1.0})
        for (double delta : {0.0, 0.04})
            drift = std::max(drift, twomode::integrate(twomode::make_drive(70.0, 0.2, ratio, delta)).max_norm_drift());
    o.check(drift < 1e-8, fmt::format("norm drift over tau 200 = {:.2e}", drift));

    const auto conv = twomode::convergence_check(twomode::make_drive(70.0, 0.2, 0.7, 0.0), 20.0, 0.04);
    o.check(conv.order && *conv.order >= 3.5 && *conv.order <= 4.5,
            fmt::format("RK4 order = {:.3f}", conv.order.value_or(NAN)));

    const auto still = twomode::integrate(twomode::make_drive(70.0, 0.2, 0.0, 0.0), {1000.0, 1e-3, 100});
    const double eta0 = order_parameter::eta_from_trajectory(still).eta;
    o.check(eta0 == 1.0, fmt::format("eta(ratio 0) = {}", eta0));

    double closed_max = 0.0;
    double quad_max = 0.0;
    for (auto p : {modes::kVortex, modes::kAxialDipole}) {
        const auto pair = modes::transition_frequency(70.0, 0.2, p);
        closed_max = std::max(closed_max, overlaps::build_table(pair).max_abs_drive());
        quad_max = std::max(quad_max, overlaps::build_table(pair, overlaps::Method::Quadrature).max_abs_drive());
    }
    o.check(closed_max == 0.0 && quad_max < 1e-12,
            fmt::format("selection rules: closed {:.1e}, quadrature {:.1e}", closed_max, quad_max));

    double diff = 0.0;
    for (double g0 : {0.0, 70.0})
        for (double lambda : {0.2, 1.0})
            for (auto p : {modes::kRadialDipole, modes::kVortex, modes::kAxialDipole}) {
                const auto pair = modes::transition_frequency(g0, lambda, p);
                const auto a = overlaps::build_table(pair);
                const auto b = overlaps::build_table(pair, overlaps::Method::Quadrature);
                for (auto m : {&overlaps::OverlapTable::I_000, &overlaps::OverlapTable::I_ppp,
                               &overlaps::OverlapTable::I_0p0, &overlaps::OverlapTable::I_p0p,
                               &overlaps::OverlapTable::I_00p, &overlaps::OverlapTable::I_p00,
                               &overlaps::OverlapTable::I_0pp, &overlaps::OverlapTable::I_pp0})
                    diff = std::max(diff, std::abs(a.*m - b.*m));
            }
    o.check(diff < 1e-8, fmt::format("closed form vs quadrature = {:.1e}", diff));

    const auto g = modes::solve_mode(modes::kGround, 70.0, 0.2);
    const double formula = g.u * std::sqrt(g.v) / std::pow(units::kTwoPi, 1.5);
    const double quad = std::abs(overlaps::overlap_integral_quadrature(g, g, g));
    o.check(std::abs(formula - quad) < 1e-10, fmt::format("I000 formula vs quadrature = {:.1e}", std::abs(formula - quad)));
    return o;
}

Outcome gpe_health()
{
    Outcome o;
    const gpe::Grid2D grid;
    const auto pair = modes::transition_frequency(70.0, 0.2, modes::kRadialDipole);
    const auto gs = gpe::ground_state(70.0, 0.2, grid);
    const gpe::Discretization disc(grid, 0.2);
    const auto basis = gpe::projection_basis(disc, gs.state, 70.0);

    modes::SolveOptions fo;
    fo.condition = modes::OptimizationCondition::FunctionalStationary;
    const double bound = modes::solve_mode(modes::kGround, 70.0, 0.2, fo).functional_value;
    o.check(gs.energy <= bound, fmt::format("ground energy {:.6f} <= functional {:.6f}", gs.energy, bound));

    const auto run = [&](double ratio, double tau_max) {
        gpe::PropagateOptions po;
        po.g0 = 70.0;
        po.lambda = 0.2;
        po.ratio = ratio;
        po.omega_drive = pair.omega_p0;
        po.tau_max = tau_max;
        return gpe::propagate(gs.state, basis, po);
    };
    const auto drift_of = [](const gpe::Series& s) {
        double d = 0.0;
        for (double n : s.norm)
            d = std::max(d, std::abs(n - s.norm.front()));
        return d;
    };

    const auto still = run(0.0, 50.0);
    const auto [lo, hi] = std::minmax_element(still.n000.begin(), still.n000.end());
    o.check(*hi - *lo < 1e-4, fmt::format("ratio 0 n000 drift over tau 50 = {:.2e}", *hi - *lo));

    const auto driven = run(0.1, 30.0);
    const double drift = std::max(drift_of(still), drift_of(driven));
    o.check(drift < 1e-8, fmt::format("norm drift = {:.2e}", drift));

    const auto traj = twomode::integrate(twomode::make_drive(70.0, 0.2, 0.1, 0.0), {30.0, 1e-3, 100});
    const auto c = gpe::compare_with_twomode(driven, traj, units::kTwoPi / pair.omega_p0);
    const double amp = c.amplitude_ratio.value_or(NAN);
    o.check(c.within_band(), fmt::format("small-drive first-max amplitude ratio = {:.3f} (band {}-{}), time ratio {:.3f}",
                                         amp, gpe::kAgreementLow, gpe::kAgreementHigh, c.time_ratio.value_or(NAN)));
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"transition frequency", transition_frequency},
        {"species table", species_table},
        {"li7 worked example", worked_example},
        {"two-mode dynamics", dynamics},
        {"order parameter sweep", sweep},
        {"conservation and properties", properties},
        {"gpe oracle health", gpe_health},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("threw: ") + e.what());
        }
        std::string detail;
        for (const auto& n : o.notes)
            detail += (detail.empty() ? "" : "; ") + n;
        fmt::print("criterion {}: {} {}: {}\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, detail);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
