#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fch/error.hpp"
#include "fch/sequence_lab.hpp"

using namespace fch;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

SequenceSpec circle_bilayer() {
    SequenceSpec s;
    s.geom = make_geometry({{"shape", "circle"}, {"rho", 1.0}});
    s.eps_list = {0.05, 0.025, 0.0125, 0.00625};
    return s;
}

}  // namespace

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
    CHECK(loglog_slope({0.1, 0.05}, {1.0, 2.0}) == doctest::Approx(-1.0));
}

TEST_CASE("eta grid") {
    const auto g = eta_grid(0.0, 1.0, 3, -1.0, 1.0, 2);
    REQUIRE(g.size() == 6);
    CHECK(g[0] == std::pair<double, double>{0.0, -1.0});
    CHECK(g[5] == std::pair<double, double>{1.0, 1.0});
    CHECK(eta_grid(0.0, 1.0, 0, 0.0, 1.0, 3).empty());
    const auto one = eta_grid(1.0, 2.0, 1, -1.0, 5.0, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::pair<double, double>{1.0, -1.0});
}

TEST_CASE("sequence settings: validation and json") {
    SequenceSpec s = circle_bilayer();
    CHECK_NOTHROW(s.validate());
    const json j = s;
    const SequenceSpec t = j.get<SequenceSpec>();
    CHECK(t.eps_list == s.eps_list);
    CHECK(t.geom->shape() == "circle");
    CHECK(json(t) == j);

    s.eps_list = {0.1, -0.05};
    CHECK_THROWS_AS(s.validate(), SpecError);
    s = circle_bilayer();
    s.eps_list.clear();
    CHECK_THROWS_AS(s.validate(), SpecError);
    s = circle_bilayer();
    s.geom = make_geometry({{"shape", "sphere"}, {"rho", 3.0}});
    s.modulation = 0.3;
    CHECK_THROWS_AS(s.validate(), SpecError);
    CHECK_THROWS_AS(json({{"kind", "vesicle"}}).get<SequenceSpec>(), SpecError);
    CHECK_THROWS_AS(json({{"embedding", "warp"}}).get<SequenceSpec>(), SpecError);
}

TEST_CASE("bilayer limit is the bending energy minus the tension term") {
    const BilayerProfile b = solve_profile(WellParams::defaults());
    const auto c = make_geometry({{"shape", "circle"}, {"rho", 1.0}});
    CHECK(bilayer_limit(*c, b, 1.0, 1.0) == doctest::Approx(2 * pi * b.a_star * (1 - 2)).epsilon(1e-10));
    CHECK(micelle_limit(2, 0.5, 1.0, 0.3, 2.0) == doctest::Approx(-0.5 * pi * 2.0));
}

TEST_CASE("circle bilayer converges at second order") {
    const ConvergenceReport r = run_convergence(circle_bilayer());
    const auto e = r.errors();
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] < e[i - 1]);
    REQUIRE(r.fitted_rate);
    CHECK(*r.fitted_rate == doctest::Approx(2.0).epsilon(0.05));
    CHECK(*r.extrapolated_limit == doctest::Approx(r.predicted_limit).epsilon(1e-4));
    CHECK(convergence_accepted(r));
    const NormLedger l = verify_norm_bounds(r);
    CHECK(l.b1_bounded);
    CHECK(l.b2_bounded);
    CHECK(l.b3_vanishes);
}

TEST_CASE("self-convergence: a normal shift does not change the limit") {
    SequenceSpec s = circle_bilayer();
    s.translate_amplitude = 0.1;
    s.translate_mode = 2;
    const ConvergenceReport r = run_convergence(s);
    CHECK(convergence_accepted(r));
    const ConvergenceReport plain = run_convergence(circle_bilayer());
    CHECK(*r.extrapolated_limit == doctest::Approx(*plain.extrapolated_limit).epsilon(1e-4));
    const NormLedger l = verify_norm_bounds(r);
    CHECK(l.b2_bounded);
    CHECK(l.b3_vanishes);
}

TEST_CASE("tangential oscillation at the eps scale makes the energy grow") {
    SequenceSpec s = circle_bilayer();
    s.modulation = 0.5;
    const ConvergenceReport r = run_convergence(s);
    CHECK(!convergence_accepted(r));
    CHECK(loglog_slope(r.eps_list, r.energy_list) == doctest::Approx(-2.0).epsilon(0.05));
    std::vector<double> res;
    for (const auto& rep : r.reports) res.push_back(rep.norm_us_l2);
    CHECK(loglog_slope(r.eps_list, res) == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(!verify_norm_bounds(r).b2_bounded);
}

TEST_CASE("translate amplitude larger than the tube is rejected") {
    SequenceSpec s = circle_bilayer();
    s.translate_amplitude = 5.0;
    s.ell = 9.0;
    const BilayerProfile b = solve_profile(s.params);
    CHECK_THROWS_AS(build_bilayer_field(s, b, 0.05), SpecError);
}

TEST_CASE("micelle sequence above the packing bound") {
    SequenceSpec s;
    s.kind = SequenceKind::Micelle;
    s.geom = make_geometry({{"shape", "circle"}, {"rho", 3.0}});
    s.alpha = 50.0;
    s.eps_list = {0.05};
    CHECK_THROWS_AS(run_convergence(s), SpecError);
}

TEST_CASE("convergence csv") {
    SequenceSpec s = circle_bilayer();
    s.eps_list = {0.05, 0.025};
    const ConvergenceReport r = run_convergence(s);
    std::stringstream ss;
    write_convergence_csv(ss, r);
    std::string line;
    std::getline(ss, line);
    CHECK(line.rfind("eps,energy,predicted_limit,abs_error,rel_error,fitted_rate", 0) == 0);
    int rows = 0;
    while (std::getline(ss, line)) ++rows;
    CHECK(rows == 2);
    std::stringstream js;
    write_convergence_jsonl(js, r);
    std::getline(js, line);
    CHECK(json::parse(line).at("eps").get<double>() == 0.05);
}

TEST_CASE("phase signs") {
    const auto sphere = make_geometry({{"shape", "sphere"}, {"rho", 3.0}});
    const PhaseInputs in = phase_inputs(*sphere, WellParams::defaults());
    CHECK(in.a_star == doctest::Approx(in.b_star).epsilon(1e-10));

    // eta2 = -eta1: bilayer positive, micelle negative
    const auto cells = phase_diagram(*sphere, 0.5, in, {{1.0, -1.0}, {0.5, -0.5}});
    for (const auto& c : cells) {
        CHECK(c.valid);
        CHECK(c.bilayer > 0.0);
        CHECK(c.micelle < 0.0);
    }

    // eta2 > 3 eta1 above the threshold radius: reversed
    const double rho = 1.5 * sphere_sign_threshold(in.a_star, in.b_star, 0.1, 0.5);
    const auto big = make_geometry({{"shape", "sphere"}, {"rho", rho}});
    const auto rev = phase_diagram(*big, 0.5, in, {{0.1, 0.5}});
    CHECK(rev[0].bilayer < 0.0);
    CHECK(rev[0].micelle > 0.0);

    const double th = sphere_sign_threshold(in.a_star, in.b_star, 1.0, 1.0);
    const BilayerProfile b = solve_profile(WellParams::defaults());
    auto at = [&](double r) { return bilayer_limit(*make_geometry({{"shape", "sphere"}, {"rho", r}}), b, 1.0, 1.0); };
    CHECK(at(0.99 * th) > 0.0);
    CHECK(at(1.01 * th) < 0.0);
}

TEST_CASE("phase csv and counts") {
    const auto sphere = make_geometry({{"shape", "sphere"}, {"rho", 3.0}});
    const PhaseInputs in{0.07, 0.07, 2.7};
    const auto cells = phase_diagram(*sphere, 0.5, in, eta_grid(0.1, 2.0, 5, -2.0, 6.0, 5));
    const auto n = phase_sign_counts(cells);
    int valid = 0;
    for (const auto& c : cells) valid += c.valid;
    CHECK(n[0] + n[1] + n[2] + n[3] == valid);
    std::stringstream ss;
    write_phase_csv(ss, cells);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "eta1,eta2,valid,bilayer_limit,micelle_limit,bilayer_sign,micelle_sign,winner");
}
