#include "fch/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fch/error.hpp"

namespace fch {

namespace {

double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_derivative(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }

void require_finite(double u, const char* where) {
    if (!std::isfinite(u)) {
        std::ostringstream os;
        os << where << ": non-finite concentration " << u;
        throw DomainError(os.str());
    }
}

double closed_form(double u, const WellParams& w) {
    return std::pow(std::abs(u), w.r) * w.bracket(u);
}

double closed_form_derivative(double u, const WellParams& w) {
    const double a = std::abs(u);
    if (a == 0.0) return 0.0;
    const double sgn = u > 0.0 ? 1.0 : -1.0;
    return w.r * std::pow(a, w.r - 1.0) * sgn * w.bracket(u) + std::pow(a, w.r) * w.bracket_derivative(u);
}

double far_field(double u, const WellParams& w) { return w.c5 * std::pow(std::abs(u), w.p); }

double far_field_derivative(double u, const WellParams& w) {
    const double a = std::abs(u);
    if (a == 0.0) return 0.0;
    return w.c5 * w.p * std::pow(a, w.p - 1.0) * (u > 0.0 ? 1.0 : -1.0);
}

// Sign test used to pick c5: W' < 0 for u < 0 and W' > 0 for u > u+.
bool derivative_signs_ok(const WellParams& w) {
    auto check = [&](double u) {
        const double d = eval_dwell(u, w);
        if (u < 0.0) return d < 0.0;
        if (u > w.u_plus) return d > 0.0;
        return true;
    };
    constexpr int coarse = 20001;
    for (int i = 0; i < coarse; ++i) {
        const double u = -1e3 + 2e3 * i / (coarse - 1);
        if (!check(u)) return false;
    }
    // The transition bands are where c5 matters; sample them densely.
    const auto& k = w.cutoff.knots;
    for (auto [lo, hi] : {std::pair{k[0], k[1]}, std::pair{k[2], k[3]}}) {
        constexpr int dense = 4001;
        for (int i = 0; i < dense; ++i) {
            if (!check(lo + (hi - lo) * i / (dense - 1))) return false;
        }
    }
    return true;
}

}  // namespace

Cutoff Cutoff::for_well(double u_plus) {
    Cutoff c;
    c.knots = {-2.0, -1.0, 2.0 * u_plus, 2.0 * u_plus + 1.0};
    return c;
}

double Cutoff::value(double u) const {
    if (is_one(u)) return 1.0;
    if (is_zero(u)) return 0.0;
    if (u < knots[1]) return smoothstep((u - knots[0]) / (knots[1] - knots[0]));
    return smoothstep((knots[3] - u) / (knots[3] - knots[2]));
}

double Cutoff::derivative(double u) const {
    if (is_one(u) || is_zero(u)) return 0.0;
    if (u < knots[1]) {
        const double width = knots[1] - knots[0];
        return smoothstep_derivative((u - knots[0]) / width) / width;
    }
    const double width = knots[3] - knots[2];
    return -smoothstep_derivative((knots[3] - u) / width) / width;
}

double WellParams::bracket(double u) const {
    const double d = u - u_plus;
    return d * d + tau * (u - (1.0 + r) / r * u_plus);
}

double WellParams::bracket_derivative(double u) const { return 2.0 * (u - u_plus) + tau; }

WellParams WellParams::make(double r, double u_plus, double tau, double p) {
    WellParams w;
    w.r = r;
    w.u_plus = u_plus;
    w.tau = tau;
    w.p = p;
    w.cutoff = Cutoff::for_well(u_plus);
    w.c5 = default_c5(r, u_plus, tau, p);
    return w;
}

WellParams WellParams::defaults() {
    static const WellParams cached = make(1.75, 1.0, 0.25, 3.0);
    return cached;
}

void WellParams::validate(int ambient_n) const {
    std::ostringstream os;
    if (!(r > 1.5 && r < 2.0)) os << "r must lie in (3/2, 2), got " << r << "; ";
    if (!(u_plus > 0.0)) os << "u_plus must be positive; ";
    if (!(tau > 0.0)) os << "tau must be positive; ";
    if (!(c5 > 0.0)) os << "c5 must be positive; ";
    if (!(p >= 2.0)) os << "p must be at least 2; ";
    if (ambient_n >= 3 && !(p < (2.0 * ambient_n - 2.0) / (ambient_n - 2.0))) {
        os << "p must be below (2n-2)/(n-2) = " << (2.0 * ambient_n - 2.0) / (ambient_n - 2.0)
           << " for n = " << ambient_n << "; ";
    }
    const auto& k = cutoff.knots;
    if (!(k[0] < k[1] && k[1] <= -1.0 && k[2] >= 2.0 * u_plus && k[2] < k[3])) {
        os << "cutoff must equal 1 on [-1, 2 u_plus]; ";
    }
    if (cutoff.degree != 5) os << "only the quintic cutoff is supported; ";
    if (!os.str().empty()) throw DomainError("invalid well parameters: " + os.str());
}

double default_c5(double r, double u_plus, double tau, double p) {
    WellParams w;
    w.r = r;
    w.u_plus = u_plus;
    w.tau = tau;
    w.p = p;
    w.cutoff = Cutoff::for_well(u_plus);
    for (int e = -20; e <= 60; ++e) {
        w.c5 = std::ldexp(1.0, e);
        if (derivative_signs_ok(w)) return w.c5;
    }
    throw DomainError("no power-of-two c5 in [2^-20, 2^60] removes the spurious zeros of W'");
}

double eval_well(double u, const WellParams& params) {
    require_finite(u, "eval_well");
    const double chi = params.cutoff.value(u);
    if (chi == 1.0) return closed_form(u, params);
    if (chi == 0.0) return far_field(u, params);
    return chi * closed_form(u, params) + (1.0 - chi) * far_field(u, params);
}

double eval_dwell(double u, const WellParams& params) {
    require_finite(u, "eval_dwell");
    const double chi = params.cutoff.value(u);
    if (chi == 1.0) return closed_form_derivative(u, params);
    if (chi == 0.0) return far_field_derivative(u, params);
    return params.cutoff.derivative(u) * (closed_form(u, params) - far_field(u, params)) +
           chi * closed_form_derivative(u, params) + (1.0 - chi) * far_field_derivative(u, params);
}

std::vector<double> default_audit_grid(const WellParams& params) {
    std::vector<double> grid;
    const double span = 10.0 * params.u_plus;
    constexpr int n = 4001;
    for (int i = 0; i < n; ++i) grid.push_back(-span + 2.0 * span * i / (n - 1));
    // Far field: logarithmic out to 1e4 on both sides.
    for (int i = 0; i <= 200; ++i) {
        const double u = span * std::pow(1e4 / span, i / 200.0);
        grid.push_back(u);
        grid.push_back(-u);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

GrowthAudit audit_growth(const WellParams& params, std::span<const double> grid) {
    GrowthAudit audit;
    const double p = params.p;

    // C1 is the far-field ratio W/|u|^p; inside the cutoff band the offsets absorb everything.
    double c1 = std::numeric_limits<double>::infinity();
    bool have_far = false;
    for (double u : grid) {
        if (!params.cutoff.is_zero(u) || u == 0.0) continue;
        have_far = true;
        const double a = std::pow(std::abs(u), p);
        c1 = std::min({c1, eval_well(u, params) / a, eval_dwell(u, params) * u / (p * a)});
    }
    if (!have_far) c1 = params.c5;
    if (!(c1 > 0.0)) {
        for (double u : grid) {
            if (!params.cutoff.is_zero(u) || u == 0.0) continue;
            if (!(eval_well(u, params) > 0.0)) audit.violations.push_back(u);
        }
        audit.reason = "no positive leading coefficient: W does not grow like |u|^p in the far field";
        return audit;
    }

    GrowthConstants g;
    g.c1 = c1;
    double lower = std::numeric_limits<double>::infinity();
    double upper = -std::numeric_limits<double>::infinity();
    double slope = -std::numeric_limits<double>::infinity();
    double coercive = std::numeric_limits<double>::infinity();
    for (double u : grid) {
        const double a = std::abs(u);
        const double w = eval_well(u, params);
        const double dw = eval_dwell(u, params);
        lower = std::min(lower, w - c1 * std::pow(a, p));
        upper = std::max(upper, w - c1 * std::pow(a, p));
        slope = std::max(slope, std::abs(dw) - c1 * p * std::pow(a, p - 1.0));
        coercive = std::min(coercive, dw * u - c1 * p * std::pow(a, p));
    }
    if (grid.empty()) lower = upper = slope = coercive = 0.0;
    g.c2 = std::min(0.0, lower);
    g.c3 = std::max(0.0, upper);
    g.c3p = std::max(0.0, slope);
    g.c4 = std::min(0.0, coercive);
    audit.constants = g;
    return audit;
}

void to_json(nlohmann::json& j, const WellParams& params) {
    j = nlohmann::json{{"r", params.r},
                       {"u_plus", params.u_plus},
                       {"tau", params.tau},
                       {"p", params.p},
                       {"c5", params.c5},
                       {"cutoff", {{"knots", params.cutoff.knots}, {"degree", params.cutoff.degree}}}};
}

void from_json(const nlohmann::json& j, WellParams& params) {
    const WellParams d = WellParams::defaults();
    params.r = j.value("r", d.r);
    params.u_plus = j.value("u_plus", d.u_plus);
    params.tau = j.value("tau", d.tau);
    params.p = j.value("p", d.p);
    if (j.contains("cutoff")) {
        j.at("cutoff").at("knots").get_to(params.cutoff.knots);
        params.cutoff.degree = j.at("cutoff").value("degree", 5);
    } else {
        params.cutoff = Cutoff::for_well(params.u_plus);
    }
    if (j.contains("c5") && !j.at("c5").is_null()) {
        params.c5 = j.at("c5").get<double>();
    } else if (params.r == d.r && params.u_plus == d.u_plus && params.tau == d.tau && params.p == d.p) {
        params.c5 = d.c5;
    } else {
        params.c5 = default_c5(params.r, params.u_plus, params.tau, params.p);
    }
}

void to_json(nlohmann::json& j, const GrowthConstants& g) {
    j = nlohmann::json{{"c1", g.c1}, {"c2", g.c2}, {"c3", g.c3}, {"c3p", g.c3p}, {"c4", g.c4}};
}

}  // namespace fch
