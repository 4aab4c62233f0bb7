#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "becmode/csv.hpp"
#include "becmode/version.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "becmode");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = becmode::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch()
{
    static const fs::path dir = [] {
        auto p = fs::temp_directory_path() / fs::path("becmode_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

becmode::csv::Table table(const std::string& text)
{
    std::istringstream in(text);
    return becmode::csv::read(in);
}

std::string data_lines(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::string kept;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#')
            kept += line + '\n';
    return kept;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

TEST_CASE("help and version")
{
    const auto top = run({"--help"});
    CHECK(top.code == 0);
    for (const char* sub : {"modes", "evolve", "sweep", "feshbach", "gpe"})
        CHECK(top.out.find(sub) != std::string::npos);
    CHECK(run({"--version"}).out.find(becmode::kVersion) != std::string::npos);
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);

    const auto fesh = run({"feshbach", "--help"});
    CHECK(fesh.code == 0);
    CHECK(fesh.out.find("(Hz") != std::string::npos);
    CHECK(fesh.out.find("(rad/s)") != std::string::npos);
    CHECK(fesh.out.find("(Bohr radii)") != std::string::npos);
    for (const char* sub : {"modes", "evolve", "sweep", "gpe"}) {
        const auto h = run({sub, "--help"});
        CHECK(h.code == 0);
        CHECK(h.out.find("trap units") != std::string::npos);
    }
}

TEST_CASE("modes")
{
    const auto r = run({"modes", "--g0", "70", "--lambda", "0.2", "--mode", "100", "--overlaps"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["omega_p0"].get<double>() == doctest::Approx(1.747).epsilon(1e-3));
    CHECK(j["n"] == 1);
    CHECK(j["overlaps"]["excitable"] == true);
    CHECK(j["ground"]["u"].get<double>() > 0.0);

    const auto g = json::parse(run({"modes", "--g0", "0", "--lambda", "1", "--mode", "000"}).out);
    CHECK(g["u"].get<double>() == doctest::Approx(1.0));
    CHECK(g["v"].get<double>() == doctest::Approx(1.0));
    CHECK(g["energy"].get<double>() == doctest::Approx(1.5));
    CHECK(g["omega_p0"].is_null());

    const auto bad = run({"modes", "--g0", "70", "--lambda", "0.2", "--mode", "777"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("not supported") != std::string::npos);
    CHECK(run({"modes", "--lambda", "-1"}).code == 2);
    CHECK(run({"modes", "--condition", "other"}).code == 2);

    const auto hz = json::parse(run({"modes", "--freq-r", "120"}).out);
    CHECK(hz["transition_hz"].get<double>() == doctest::Approx(209.6).epsilon(0.05));
    const auto printed = json::parse(run({"modes", "--overlaps", "--printed-exponents"}).out);
    CHECK(printed["printed_exponents"] == true);
    CHECK_FALSE(printed["warnings"].empty());
}

TEST_CASE("evolve")
{
    const auto r = run({"evolve", "--g0", "70", "--lambda", "0.2", "--ratio", "1.0", "--delta", "0.04"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind(std::string("# becmode ") + becmode::kVersion + " evolve", 0) == 0);
    CHECK(r.out.find("# ratio = 1") != std::string::npos);
    const auto t = table(r.out);
    CHECK(max_of(t.values("np")) >= 0.95);

    const auto z = run({"evolve", "--ratio", "0", "--tau-max", "20"});
    REQUIRE(z.code == 0);
    for (double x : table(z.out).values("np"))
        CHECK(x == 0.0);

    const auto bad = run({"evolve", "--dtau", "1"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("stability guard") != std::string::npos);
    CHECK(run({"evolve", "--ratio", "-1"}).code == 2);
    CHECK(run({"evolve", "--ratio", "abc"}).code == 2);
}

TEST_CASE("evolve writes files and is deterministic")
{
    const auto csv1 = scratch() / "a.csv";
    const auto csv2 = scratch() / "b.csv";
    const auto svg = scratch() / "a.svg";
    const auto r = run({"evolve", "--tau-max", "30", "--out", csv1.string(), "--svg", svg.string()});
    REQUIRE(r.code == 0);
    const auto summary = json::parse(r.out);
    CHECK(summary["max_norm_drift"].get<double>() < 1e-8);
    REQUIRE(run({"evolve", "--tau-max", "30", "--out", csv2.string()}).code == 0);
    CHECK(data_lines(slurp(csv1)) == data_lines(slurp(csv2)));
    CHECK(slurp(svg).find("stroke-dasharray") != std::string::npos);
    const auto echo = slurp(csv1.string() + ".config");
    CHECK(echo.find("tau-max = 30") != std::string::npos);

    const auto io = run({"evolve", "--tau-max", "1", "--out", (scratch() / "missing" / "x.csv").string()});
    CHECK(io.code == 4);
}

TEST_CASE("config file precedence")
{
    const auto cfg = scratch() / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "# evolve settings\nratio = 0.7\ndelta = 0\ntau-max = 3\nstride = 1000\n";
    }
    const auto r = run({"evolve", "--config", cfg.string(), "--ratio", "0.5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# ratio = 0.5\n") != std::string::npos);
    CHECK(r.out.find("# tau-max = 3\n") != std::string::npos);
    const auto t = table(r.out);
    CHECK(t.values("tau").back() == 3.0);

    const auto direct = run({"evolve", "--ratio", "0.5", "--delta", "0", "--tau-max", "3", "--stride", "1000"});
    CHECK(table(direct.out).values("np") == t.values("np"));

    {
        std::ofstream f(cfg);
        f << "unknown-key = 1\n";
    }
    CHECK(run({"evolve", "--config", cfg.string()}).code == 2);
    {
        std::ofstream f(cfg);
        f << "no equals sign\n";
    }
    CHECK(run({"evolve", "--config", cfg.string()}).code == 2);
    CHECK(run({"evolve", "--config", (scratch() / "nope.cfg").string()}).code == 4);
    {
        std::ofstream f(cfg);
        f << "overlaps = true\n";
    }
    const auto m = run({"modes", "--config", cfg.string()});
    CHECK(json::parse(m.out).contains("overlaps"));
}

TEST_CASE("sweep")
{
    CHECK(run({"sweep", "--ratio", ""}).code == 2);
    CHECK(run({"sweep", "--ratio", "1.0:0.5:0.1"}).code == 2);
    CHECK(run({"sweep", "--ratio", "0.5,0.6", "--deltas", ""}).code == 2);

    const auto summary = scratch() / "s.json";
    const auto r = run({"sweep", "--deltas", "-0.02", "--summary", summary.string(), "--quiet", "--threads", "1"});
    REQUIRE(r.code == 0);
    const auto t = table(r.out);
    CHECK(t.rows.size() == 141);
    const auto j = json::parse(slurp(summary));
    REQUIRE(j.size() == 1);
    CHECK(j[0]["class"] == "smooth");

    const auto small = run({"sweep", "--deltas", "0,0.04", "--ratio", "0.6,0.8,1.0", "--tau-max", "100"});
    REQUIRE(small.code == 0);
    CHECK(table(small.out).rows.size() == 6);
    CHECK(small.err.find("sweep: 6/6") != std::string::npos);
    const auto again = run({"sweep", "--deltas", "0,0.04", "--ratio", "0.6,0.8,1.0", "--tau-max", "100", "--threads",
                            "2"});
    CHECK(data_lines(again.out) == data_lines(small.out));
}

TEST_CASE("feshbach")
{
    const auto r = run({"feshbach", "--species", "li7", "--g0", "70", "--lambda", "0.2", "--ratio", "0.8",
                        "--b-fraction", "0.1", "--omega-r", "753.98"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["b0_gauss"].get<double>() == doctest::Approx(636.0).epsilon(0.01));
    CHECK(j["b_gauss"].get<double>() == doctest::Approx(10.0).epsilon(0.05));
    CHECK(j["atom_count"].get<double>() == doctest::Approx(9.3e4).epsilon(0.05));
    CHECK(j["modulation_hz"].get<double>() == doctest::Approx(209.6).epsilon(0.01));

    const auto t = run({"feshbach", "--table"});
    REQUIRE(t.code == 0);
    CHECK(table(t.out).rows.size() == 4);
    CHECK(t.out.find("species,b0_gauss,b_gauss,a0_bohr,a_bohr,ratio,atom_count,b_per_ratio") != std::string::npos);

    const auto inf = run({"feshbach", "--species", "li7", "--target-a0", "-27.5"});
    CHECK(inf.code == 2);
    CHECK(run({"feshbach", "--species", "xx"}).code == 2);
    CHECK(run({"feshbach", "--omega-r", "1", "--freq-r", "1"}).code == 2);

    const auto reg = scratch() / "species.ini";
    REQUIRE(run({"feshbach", "--write-registry", reg.string()}).code == 0);
    const auto again = run({"feshbach", "--registry", reg.string(), "--table"});
    CHECK(data_lines(again.out) == data_lines(t.out));
    CHECK(run({"feshbach", "--registry", (scratch() / "none.ini").string()}).code == 4);

    const auto w = json::parse(run({"feshbach", "--atoms", "100000", "--ratio", "1"}).out);
    CHECK(w["b_gauss"].get<double>() == doctest::Approx(11.68).epsilon(0.01));
}

TEST_CASE("gpe")
{
    CHECK(run({"gpe", "--nr", "4"}).code == 2);
    CHECK(run({"gpe", "--r-max", "-1"}).code == 2);
    CHECK(run({"gpe", "--dt", "0.01"}).code == 2);

    const auto report = scratch() / "gpe.json";
    const auto snap = scratch() / "snap.csv";
    const auto r = run({"gpe", "--ratio", "0", "--nr", "32", "--nz", "64", "--tau-max", "5", "--report",
                        report.string(), "--snapshot", snap.string()});
    REQUIRE(r.code == 0);
    const auto t = table(r.out);
    const auto n = t.values("n000");
    CHECK(max_of(n) - *std::min_element(n.begin(), n.end()) < 1e-4);
    const auto j = json::parse(slurp(report));
    CHECK(j["ground_state"]["below_bound"] == true);
    CHECK(j["max_norm_drift"].get<double>() < 1e-8);
    CHECK(json::parse(slurp(snap.string() + ".json"))["nr"] == 32);

    const auto evo = scratch() / "ref.csv";
    REQUIRE(run({"evolve", "--ratio", "0.1", "--delta", "0", "--tau-max", "30", "--out", evo.string()}).code == 0);
    const auto cmp = run({"gpe", "--ratio", "0.1", "--nr", "32", "--nz", "64", "--tau-max", "30", "--twomode-csv",
                          evo.string(), "--report", report.string()});
    REQUIRE(cmp.code == 0);
    const auto c = json::parse(slurp(report))["comparison"];
    CHECK(c["first_max_amplitude_ratio"].is_number());
    CHECK(c["agreement_band"][1] == 1.25);
}
