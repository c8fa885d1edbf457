#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <sstream>

#include "fch/bilayer_profile.hpp"
#include "fch/error.hpp"

using namespace fch;
namespace bq = boost::math::quadrature;

namespace {

// Independent description of the pulse through the quadratic factor of W.
struct Oracle {
    WellParams p = WellParams::defaults();
    double u1 = 0.0, u2 = 0.0;

    Oracle() {
        const double k = (1 + p.r) / p.r;
        auto q = [&](double u) { return (u - p.u_plus) * (u - p.u_plus) + p.tau * (u - k * p.u_plus); };
        boost::math::tools::eps_tolerance<double> tol(52);
        std::uintmax_t it = 200;
        const auto br = boost::math::tools::toms748_solve(q, 0.0, p.u_plus, tol, it);
        u1 = 0.5 * (br.first + br.second);
        u2 = (p.u_plus * p.u_plus - p.tau * k * p.u_plus) / u1;
    }

    // W(u) with the distance to the peak passed separately.
    double w(double u, double to_peak) const { return std::pow(u, p.r) * to_peak * (u2 - u); }
    // 1 / sqrt(2 W); nodes so close to u = 0 that u^r underflows carry no weight.
    double inv_speed(double u, double to_peak) const {
        const double v = w(u, to_peak);
        return v > 0 ? 1.0 / std::sqrt(2 * v) : 0.0;
    }

    // integral_0^{u1} g(u) / sqrt(2 W(u)) du split at the midpoint.
    template <class G>
    double width_integral(G g, double upto = -1.0) const {
        bq::tanh_sinh<double> ts;
        const double m = 0.5 * u1;
        const double lo = upto < 0 ? 0.0 : upto;
        double total = 0.0;
        if (lo < m) total += ts.integrate([&](double u) { return g(u) * inv_speed(u, u1 - u); }, lo, m);
        const double vmax = lo < m ? u1 - m : u1 - lo;
        total += ts.integrate([&](double v) { return g(u1 - v) * inv_speed(u1 - v, v); }, 0.0, vmax);
        return total;
    }
};

}  // namespace

TEST_CASE("peak amplitude is the small root of the bracket") {
    const Oracle o;
    const WellParams p = WellParams::defaults();
    CHECK(peak_amplitude(p) == doctest::Approx(o.u1).epsilon(1e-14));
    CHECK(critical_tau(p) == doctest::Approx(1.75 / 2.75).epsilon(1e-15));
}

TEST_CASE("half width and shape constants against tanh-sinh") {
    const Oracle o;
    const BilayerProfile b = solve_profile(WellParams::defaults());
    const double L = o.width_integral([](double) { return 1.0; });
    CHECK(b.half_width_L == doctest::Approx(L).epsilon(1e-11));
    CHECK(half_width(WellParams::defaults()) == doctest::Approx(L).epsilon(1e-11));

    bq::tanh_sinh<double> ts;
    const double a = std::sqrt(2.0) * ts.integrate([&](double u) { return std::sqrt(o.w(u, o.u1 - u)); }, 0.0, o.u1);
    CHECK(b.a_star == doctest::Approx(a).epsilon(1e-11));
    CHECK(b.b_star == doctest::Approx(a).epsilon(1e-11));
    CHECK(std::abs(b.a_star - b.b_star) / b.a_star < 1e-8);

    const double mass = 2.0 * o.width_integral([](double u) { return u; });
    CHECK(b.mass_per_length() == doctest::Approx(mass).epsilon(1e-10));
}

TEST_CASE("b* by direct z quadrature of the interpolated profile") {
    const BilayerProfile b = solve_profile(WellParams::defaults());
    const WellParams& p = b.params();
    double err = 0.0;
    const double v = bq::gauss_kronrod<double, 31>::integrate(
        [&](double z) { return eval_well(b.value(z), p); }, -b.half_width_L, b.half_width_L, 20, 1e-13, &err);
    CHECK(v == doctest::Approx(b.b_star).epsilon(1e-9));
}

TEST_CASE("profile inverts the width integral") {
    const Oracle o;
    const BilayerProfile b = solve_profile(WellParams::defaults());
    for (double frac : {0.999, 0.9, 0.5, 0.1, 1e-3}) {
        const double u = frac * o.u1;
        const double z = o.width_integral([](double) { return 1.0; }, u);
        CHECK(b.value(z) == doctest::Approx(u).epsilon(1e-9));
        CHECK(b.value(-z) == doctest::Approx(u).epsilon(1e-9));
    }
}

TEST_CASE("pulse shape") {
    const BilayerProfile b = solve_profile(WellParams::defaults());
    const WellParams& p = b.params();
    CHECK(b.value(0.0) == doctest::Approx(b.u_max).epsilon(1e-14));
    CHECK(b.value(b.half_width_L) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(b.value(b.half_width_L + 0.5) == 0.0);
    CHECK(b.slope(-b.half_width_L - 1.0) == 0.0);
    double equi = 0.0, ode = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double z = -b.half_width_L + 2 * b.half_width_L * i / 4000.0;
        const double u = b.value(z), du = b.slope(z);
        equi = std::max(equi, std::abs(0.5 * du * du - eval_well(u, p)));
        if (std::abs(z) < b.half_width_L - 0.5) ode = std::max(ode, std::abs(b.curvature(z) - eval_dwell(u, p)));
        CHECK(b.value(z) == doctest::Approx(b.value(-z)).epsilon(1e-13));
    }
    CHECK(equi <= 1e-8);
    CHECK(ode <= 1e-8);
}

TEST_CASE("samples are symmetric and increasing in z") {
    const BilayerProfile b = solve_profile(WellParams::defaults(), 256);
    REQUIRE(b.z_samples.size() == b.u_samples.size());
    for (std::size_t i = 1; i < b.z_samples.size(); ++i) CHECK(b.z_samples[i] > b.z_samples[i - 1]);
    CHECK(b.z_samples.front() == doctest::Approx(-b.half_width_L));
    CHECK(b.z_samples.back() == doctest::Approx(b.half_width_L));
}

TEST_CASE("no pulse beyond the critical depth") {
    WellParams p = WellParams::defaults();
    p.tau = 0.7;
    CHECK_THROWS_AS(peak_amplitude(p), InfeasibleWellError);
    CHECK_THROWS_AS(solve_profile(p), InfeasibleWellError);
}

TEST_CASE("other admissible wells") {
    for (double r : {1.55, 1.9}) {
        const WellParams p = WellParams::make(r, 1.0, 0.2, 3.0);
        const BilayerProfile b = solve_profile(p);
        CHECK(std::abs(b.a_star - b.b_star) / b.a_star < 1e-8);
        CHECK(b.value(0.0) == doctest::Approx(peak_amplitude(p)));
    }
}

TEST_CASE("csv carries a json header") {
    const BilayerProfile b = solve_profile(WellParams::defaults(), 64);
    std::stringstream ss;
    write_profile_csv(ss, b);
    std::string line;
    std::getline(ss, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("kind") == "bilayer");
    CHECK(j.at("a_star").get<double>() == doctest::Approx(b.a_star));
    std::getline(ss, line);
    CHECK(line == "z,u");
    int rows = 0;
    while (std::getline(ss, line)) ++rows;
    CHECK(rows == static_cast<int>(b.z_samples.size()));
}
