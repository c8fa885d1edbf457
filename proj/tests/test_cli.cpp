#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "fch");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = fch::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / ("fch_cli_" + name)).string(); }

}  // namespace

TEST_CASE("help and version") {
    CHECK(invoke({"--help"}).code == 0);
    const Run v = invoke({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"bogus"}).code == 2);
    CHECK(invoke({"profile", "--nope"}).code == 2);
    const Run r = invoke({"profile", "-o", tmp("x.csv")});
    CHECK(r.code == 2);
    CHECK(json::parse(r.err).at("error") == "usage");
    CHECK(invoke({"phase", "--eta1-count", "0", "-o", tmp("p.csv")}).code == 2);
    CHECK(invoke({"profile", "--kind", "bilayer", "--config", tmp("missing.json")}).code == 2);
}

TEST_CASE("infeasible input exits with 3") {
    const Run r = invoke({"profile", "--kind", "bilayer", "--tau", "0.9", "-o", tmp("x.csv")});
    CHECK(r.code == 3);
    CHECK(json::parse(r.err).at("error") == "infeasible_well");
    CHECK(invoke({"converge", "--shape", "square", "-o", tmp("c.csv")}).code == 3);
    CHECK(invoke({"converge", "--kind", "micelle", "--rho", "3", "--alpha", "50", "--eps-list", "0.05", "-o", tmp("c.csv")})
              .code == 3);
}

TEST_CASE("error kinds map to exit codes") {
    CHECK(fch::cli::exit_code_for("numerical_error") == 4);
    CHECK(fch::cli::exit_code_for("infeasible_well") == 3);
    CHECK(fch::cli::exit_code_for("infeasible_placement") == 3);
    CHECK(fch::cli::exit_code_for("geometry_error") == 3);
    CHECK(fch::cli::exit_code_for("spec_error") == 3);
}

TEST_CASE("profile writes csv and a reproducible manifest") {
    const std::string out = tmp("bilayer.csv");
    const Run r = invoke({"profile", "--kind", "bilayer", "--samples", "64", "-o", out});
    REQUIRE(r.code == 0);
    const json s = json::parse(r.out);
    CHECK(s.at("u_max").get<double>() == doctest::Approx(0.476901842685572).epsilon(1e-12));
    const json header = json::parse(slurp(out).substr(0, slurp(out).find('\n')));
    CHECK(header.at("a_star").get<double>() == doctest::Approx(header.at("b_star").get<double>()).epsilon(1e-8));
    const std::string m1 = slurp(out + ".manifest.json");
    REQUIRE(invoke({"profile", "--kind", "bilayer", "--samples", "64", "-o", out}).code == 0);
    CHECK(slurp(out + ".manifest.json") == m1);
    const json m = json::parse(m1);
    CHECK(m.at("version") == "0.1.0");
    CHECK(m.at("config").at("well").at("c5") == 2.0);
}

TEST_CASE("dry run prints the resolved config with flags over the config file") {
    const std::string cfg = tmp("cfg.json");
    std::ofstream(cfg) << R"({"kind":"bilayer","alpha":0.7,"eta1":2.0,"geometry":{"shape":"circle","rho":2.0}})";
    const Run r = invoke({"converge", "--config", cfg, "--eta1", "1.5", "--eps-list", "0.1,0.05", "--dry-run"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("alpha") == 0.7);
    CHECK(j.at("eta1") == 1.5);
    CHECK(j.at("geometry").at("rho") == 2.0);
    CHECK(j.at("eps_list") == json({0.1, 0.05}));
    CHECK(j.at("well").at("c5") == 2.0);
}

TEST_CASE("converge on the unit circle") {
    const std::string out = tmp("conv.csv");
    const Run r = invoke({"converge", "--eps-list", "0.05,0.025,0.0125", "-o", out, "--jsonl", tmp("conv.jsonl")});
    CHECK(r.code == 0);
    CHECK(json::parse(r.out).at("accepted") == true);
    CHECK(std::filesystem::exists(tmp("conv.jsonl")));
    CHECK(std::filesystem::exists(out + ".manifest.json"));

    const Run bad = invoke({"converge", "--modulation", "0.5", "--eps-list", "0.05,0.025,0.0125", "-o", out});
    CHECK(bad.code == 4);
}

TEST_CASE("single phase cell") {
    const std::string out = tmp("phase.csv");
    const Run r = invoke({"phase", "--eta1-min", "1", "--eta1-count", "1", "--eta2-min", "-1", "--eta2-count", "1", "-o", out});
    REQUIRE(r.code == 0);
    const json s = json::parse(r.out);
    CHECK(s.at("cells") == 1);
    CHECK(s.at("signs").at("+-") == 1);
    std::ifstream f(out);
    std::string line;
    std::getline(f, line);
    std::getline(f, line);
    CHECK(line.rfind("1,-1,1,", 0) == 0);
}
