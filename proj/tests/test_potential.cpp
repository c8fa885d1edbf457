#include <doctest.h>

#include <cmath>
#include <random>

#include "fch/error.hpp"
#include "fch/potential.hpp"

using namespace fch;

TEST_CASE("default well") {
    const WellParams p = WellParams::defaults();
    CHECK(p.r == 1.75);
    CHECK(p.u_plus == 1.0);
    CHECK(p.tau == 0.25);
    CHECK(p.p == 3.0);
    CHECK(p.c5 == 2.0);
    CHECK_NOTHROW(p.validate(3));
}

TEST_CASE("well values on the closed-form branch") {
    const WellParams p = WellParams::defaults();
    const double k = (1 + p.r) / p.r;
    for (double u : {0.05, 0.3, 0.7, 1.0, 1.4}) {
        const double expect = std::pow(u, p.r) * ((u - 1) * (u - 1) + p.tau * (u - k));
        CHECK(eval_well(u, p) == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK(eval_well(0.0, p) == 0.0);
    CHECK(eval_dwell(0.0, p) == 0.0);
    // u+ is a critical point with W(u+) = -tau u+ / r
    CHECK(std::abs(eval_dwell(1.0, p)) < 1e-14);
    CHECK(eval_well(1.0, p) == doctest::Approx(-0.25 / 1.75).epsilon(1e-14));
}

TEST_CASE("W' agrees with a centered difference of W") {
    const WellParams p = WellParams::defaults();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const double u = dist(rng);
        const double h = 1e-5 * std::max(1.0, std::abs(u));
        const double fd = (eval_well(u + h, p) - eval_well(u - h, p)) / (2 * h);
        CHECK(eval_dwell(u, p) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("far field grows like c5 |u|^p") {
    const WellParams p = WellParams::defaults();
    for (double u : {10.0, -10.0, 100.0}) CHECK(eval_well(u, p) == doctest::Approx(p.c5 * std::pow(std::abs(u), 3)));
}

TEST_CASE("critical points of W are 0, the barrier top and u+") {
    const WellParams p = WellParams::defaults();
    // the bracket of W' / u^(r-1) is a quadratic with roots u+ and u*
    const double u_star = (p.r * p.u_plus - p.tau * (1 + p.r)) / (p.r + 2);
    CHECK(std::abs(eval_dwell(u_star, p)) < 1e-14);
    CHECK(eval_well(u_star, p) > 0.0);
    std::vector<double> roots;
    double prev = eval_dwell(-50.0, p);
    for (double u = -50.0; u <= 50.0; u += 1e-3) {
        const double d = eval_dwell(u, p);
        if (d * prev < 0) roots.push_back(u);
        if (d != 0.0) prev = d;
    }
    REQUIRE(roots.size() == 3);
    CHECK(std::abs(roots[0]) < 2e-3);
    CHECK(roots[1] == doctest::Approx(u_star).epsilon(1e-2));
    CHECK(roots[2] == doctest::Approx(p.u_plus).epsilon(1e-2));
}

TEST_CASE("invalid parameters are rejected") {
    WellParams p = WellParams::defaults();
    p.r = 2.5;
    CHECK_THROWS_AS(p.validate(3), DomainError);
    p = WellParams::defaults();
    p.u_plus = -1.0;
    CHECK_THROWS_AS(p.validate(3), DomainError);
    p = WellParams::defaults();
    p.p = 8.0;
    CHECK_THROWS_AS(p.validate(3), DomainError);
}

TEST_CASE("growth constants hold pointwise") {
    const WellParams p = WellParams::defaults();
    const GrowthAudit audit = audit_growth(p, default_audit_grid(p));
    REQUIRE(audit.feasible());
    const GrowthConstants& g = *audit.constants;
    CHECK(g.c1 > 0.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-30.0, 30.0);
    for (int i = 0; i < 2000; ++i) {
        const double u = dist(rng);
        const double a = std::pow(std::abs(u), p.p);
        const double w = eval_well(u, p);
        const double dw = eval_dwell(u, p);
        const double tol = 1e-9 * (1 + a);
        CHECK(g.c1 * a + g.c2 <= w + tol);
        CHECK(w <= g.c1 * a + g.c3 + tol);
        CHECK(std::abs(dw) <= g.c1 * p.p * std::pow(std::abs(u), p.p - 1) + g.c3p + tol);
        CHECK(g.c1 * p.p * a + g.c4 <= dw * u + tol);
    }
}

TEST_CASE("json round trip") {
    const WellParams p = WellParams::make(1.6, 2.0, 0.3, 3.0);
    const nlohmann::json j = p;
    const WellParams q = j.get<WellParams>();
    CHECK(q.r == p.r);
    CHECK(q.u_plus == p.u_plus);
    CHECK(q.tau == p.tau);
    CHECK(q.c5 == p.c5);
    CHECK(q.cutoff.knots == p.cutoff.knots);
}

TEST_CASE("default c5 is a power of two") {
    const double c = default_c5(1.6, 2.0, 0.3, 3.0);
    const double e = std::log2(c);
    CHECK(e == doctest::Approx(std::round(e)));
}
