#include <doctest.h>

#include <cmath>
#include <sstream>

#include "becmode/errors.hpp"
#include "becmode/feshbach.hpp"
#include "becmode/units.hpp"

using namespace becmode;
using namespace becmode::feshbach;

namespace {

const FeshbachParams& li7() { return find_species(builtin_species(), "li7"); }

}  // namespace

TEST_CASE("scattering length near a resonance")
{
    const auto& p = li7();
    CHECK(scattering_length(p, p.b_res_gauss + 2.0 * p.delta_gauss) == doctest::Approx(p.a_nr_bohr / 2.0));
    CHECK(scattering_length(p, 636.0) == doctest::Approx(3.888888888888889).epsilon(1e-12));
    CHECK(scattering_length(p, 636.0) == doctest::Approx(3.9).epsilon(0.01));
    CHECK(scattering_length(p, 1e12) == doctest::Approx(p.a_nr_bohr).epsilon(1e-8));
    CHECK(scattering_length(p, -1e12) == doctest::Approx(p.a_nr_bohr).epsilon(1e-8));
    CHECK_THROWS_AS(scattering_length(p, p.b_res_gauss), SingularityError);
}

TEST_CASE("scattering length is monotone on each side of the pole")
{
    for (const auto& [label, p] : builtin_species()) {
        const double sign = p.delta_gauss * p.a_nr_bohr > 0 ? 1.0 : -1.0;
        for (double side : {-1.0, 1.0}) {
            double prev = scattering_length(p, p.b_res_gauss + side * 1e-3 * std::abs(p.delta_gauss));
            for (int i = 2; i < 200; ++i) {
                const double B = p.b_res_gauss + side * 1e-3 * i * std::abs(p.delta_gauss);
                const double a = scattering_length(p, B);
                // da/dB = a_nr Delta / (B - B_res)^2 has the sign of Delta a_nr
                CHECK(sign * (a - prev) * side > 0.0);
                prev = a;
            }
        }
    }
}

TEST_CASE("linearized modulation")
{
    const auto& p = li7();
    const auto zero = linearize_modulation(p, 636.0, 0.0);
    CHECK(zero.a_bohr == 0.0);
    CHECK(zero.a0_bohr == doctest::Approx(scattering_length(p, 636.0)));

    const auto m = linearize_modulation(p, 636.0, 9.9);
    CHECK(m.a_bohr / m.a0_bohr == doctest::Approx(0.807142857142857).epsilon(1e-12));
    CHECK(m.a_bohr / m.a0_bohr == doctest::Approx(0.8).epsilon(0.02));

    CHECK_THROWS_AS(linearize_modulation(p, 636.0, 99.0), ExpansionValidityError);
    CHECK_THROWS_AS(linearize_modulation(p, 636.0, -120.0), ExpansionValidityError);
    CHECK_THROWS_AS(linearize_modulation(p, p.b_res_gauss, 1.0), SingularityError);
}

TEST_CASE("first-order error halves with b")
{
    const auto& p = li7();
    const double B0 = 636.0;
    auto rel_err = [&](double b) {
        const double exact = scattering_length(p, B0 + b) - scattering_length(p, B0);
        const double lin = linearize_modulation(p, B0, b).a_bohr;
        return std::abs(lin - exact) / std::abs(exact);
    };
    const double e1 = rel_err(4.0);
    const double e2 = rel_err(2.0);
    const double e3 = rel_err(1.0);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("plan_field round trip")
{
    const auto& p = li7();
    for (double a0 : {2.0, 3.651533930049907, 6.0}) {
        for (double ratio : {0.0, 0.3, 0.8, 1.0}) {
            PlanRequest req;
            req.target_a0_bohr = a0;
            req.target_ratio = ratio;
            const auto plan = plan_field(p, req);
            const auto back = linearize_modulation(p, plan.b0_gauss, plan.b_gauss);
            CHECK(std::abs(back.a0_bohr - a0) <= 1e-10 * a0);
            CHECK(std::abs(back.a_bohr / back.a0_bohr - ratio) <= 1e-10 * std::max(ratio, 1.0));
            CHECK(std::abs(plan.b_gauss) <= kMaxExpansionFraction * std::abs(plan.b0_gauss - p.b_res_gauss));
        }
    }
}

TEST_CASE("worked example: coefficient of b per unit ratio")
{
    const auto& p = li7();
    // a0 for N = 1e5 at g0 = 70, 120 Hz
    PlanRequest req;
    req.target_a0_bohr = 3.651533930049907;
    req.target_ratio = 1.0;
    const auto plan = plan_field(p, req);
    CHECK(plan.b_gauss == doctest::Approx(11.68).epsilon(0.01));
    CHECK(plan.b_gauss == doctest::Approx(11.693044557714718).epsilon(1e-9));
    CHECK(field_amplitude_per_ratio(p, plan.b0_gauss) == doctest::Approx(plan.b_gauss).epsilon(1e-12));
    CHECK(plan.b0_gauss == doctest::Approx(635.2456827012813).epsilon(1e-10));
    CHECK(plan.b0_gauss >= 632.5 * 0.99);
    CHECK(plan.b0_gauss <= 636.0 * 1.01);
}

TEST_CASE("fraction rule reproduces the Li-7 and Rb-87 rows")
{
    PlanRequest req;
    req.target_ratio = 0.8;
    req.b_fraction = 0.1;
    const auto li = plan_field(li7(), req);
    CHECK(li.b0_gauss == doctest::Approx(636.0).epsilon(0.01));
    CHECK(li.b_gauss == doctest::Approx(10.0).epsilon(0.05));
    CHECK(li.ratio() == doctest::Approx(0.8).epsilon(1e-10));
    const auto rb = plan_field(find_species(builtin_species(), "rb87"), req);
    CHECK(rb.b0_gauss == doctest::Approx(1007.53).epsilon(1e-4));
    CHECK(rb.b_gauss == doctest::Approx(0.02).epsilon(0.05));
}

TEST_CASE("infeasible plans")
{
    PlanRequest req;
    req.target_a0_bohr = li7().a_nr_bohr;
    req.target_ratio = 0.8;
    CHECK_THROWS_AS(plan_field(li7(), req), InfeasiblePlanError);

    req.target_a0_bohr = 3.9;
    req.target_ratio = 40.0;
    CHECK_THROWS_AS(plan_field(li7(), req), InfeasiblePlanError);

    req.target_ratio = -0.1;
    CHECK_THROWS_AS(plan_field(li7(), req), ParameterError);

    PlanRequest frac;
    frac.target_ratio = 0.8;
    frac.b_fraction = 0.15;
    const auto warned = plan_field(li7(), frac);
    CHECK_FALSE(warned.warnings.empty());
    frac.b_fraction = 0.3;
    CHECK_THROWS_AS(plan_field(li7(), frac), InfeasiblePlanError);
}

TEST_CASE("species table")
{
    const auto rows = species_table(builtin_species(), 70.0, 0.8, 0.1, units::hz_to_angular(120.0));
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r.plan.ratio() == doctest::Approx(0.8).epsilon(1e-10));
        CHECK(std::abs(r.plan.b_gauss) == doctest::Approx(0.1 * std::abs(r.plan.b0_gauss - r.species.b_res_gauss)));
        CHECK(r.atom_count > 0.0);
        CHECK(r.plan.a0_bohr > 0.0);
    }
}

TEST_CASE("registry round trip and lookup errors")
{
    std::stringstream s;
    write_species_registry(s, builtin_species());
    const auto back = read_species_registry(s);
    REQUIRE(back.size() == builtin_species().size());
    for (const auto& [label, p] : builtin_species()) {
        const auto& q = back.at(label);
        CHECK(q.b_res_gauss == p.b_res_gauss);
        CHECK(q.delta_gauss == p.delta_gauss);
        CHECK(q.a_nr_bohr == p.a_nr_bohr);
        CHECK(q.mass_number == p.mass_number);
    }
    CHECK_THROWS_AS(find_species(builtin_species(), "na23"), ParameterError);

    std::istringstream bad("[x]\nb_res_gauss = 1\ndelta_gauss = 0\na_nr_bohr = 1\nmass_number = 1\n");
    CHECK_THROWS_AS(read_species_registry(bad), ParameterError);
}
