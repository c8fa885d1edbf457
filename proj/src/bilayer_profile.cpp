#include "fch/bilayer_profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "fch/error.hpp"
#include "fch/hermite.hpp"
#include "fch/quadrature.hpp"

namespace fch {

namespace {

constexpr double kQuadTol = 1e-14;

struct Roots {
    double small, large;
};

Roots bracket_roots(const WellParams& w) {
    // (u-u+)^2 + tau(u - (1+r)/r u+) = u^2 - (2u+ - tau) u + (u+^2 - tau (1+r) u+ / r)
    const double sum = 2.0 * w.u_plus - w.tau;
    const double product = w.u_plus * w.u_plus - w.tau * (1.0 + w.r) * w.u_plus / w.r;
    const double disc = sum * sum - 4.0 * product;
    if (!(product > 0.0) || !(sum > 0.0) || disc < 0.0) {
        std::ostringstream os;
        os << "bracket has no root in (0, u+) for tau = " << w.tau << " (critical tau = " << critical_tau(w)
           << ")";
        throw InfeasibleWellError(os.str());
    }
    const double large = 0.5 * (sum + std::sqrt(disc));
    return {product / large, large};
}

}  // namespace

double critical_tau(const WellParams& params) { return params.r * params.u_plus / (1.0 + params.r); }

double peak_amplitude(const WellParams& params) {
    params.validate(1);
    const double u_max = bracket_roots(params).small;
    if (!(u_max > 0.0 && u_max < params.u_plus)) {
        throw InfeasibleWellError("pulse peak outside (0, u+)");
    }
    return u_max;
}

FactoredWell FactoredWell::from(const WellParams& params) {
    params.validate(1);
    const Roots roots = bracket_roots(params);
    return {params.r, roots.small, roots.large};
}

double FactoredWell::value(double u) const { return std::pow(u, r) * (u_max - u) * (u_2 - u); }

double FactoredWell::width_density_edge(double t) const {
    const double k = edge_exponent();
    const double u = u_mid() * std::pow(t, k);
    return std::pow(u_mid(), 1.0 - 0.5 * r) * k / std::sqrt(2.0 * (u_max - u) * (u_2 - u));
}

double FactoredWell::width_density_peak(double s) const {
    const double gap = u_max - u_mid();
    const double u = u_max - gap * s * s;
    return 2.0 * std::sqrt(gap) / std::sqrt(2.0 * std::pow(u, r) * (u_2 - u));
}

double half_width(const WellParams& params) {
    const FactoredWell w = FactoredWell::from(params);
    const double edge = integrate([&](double t) { return w.width_density_edge(t); }, 0.0, 1.0, kQuadTol,
                                  "half_width (edge chart)");
    const double peak = integrate([&](double s) { return w.width_density_peak(s); }, 0.0, 1.0, kQuadTol,
                                  "half_width (peak chart)");
    return edge + peak;
}

BilayerProfile solve_profile(const WellParams& params, int n_samples) {
    if (n_samples < 32) throw DomainError("solve_profile needs at least 32 samples");
    BilayerProfile prof;
    prof.params_ = params;
    prof.well_ = FactoredWell::from(params);
    const FactoredWell& w = prof.well_;
    prof.u_max = w.u_max;

    const int n_peak = n_samples / 2;
    const int n_edge = n_samples - n_peak;
    const double gap = w.u_max - w.u_mid();
    const double k = w.edge_exponent();

    // Walk outward from the peak: z(u) = integral_u^{u_max} dv / sqrt(2W(v)).
    prof.half_.push_back({0.0, w.u_max});
    double z = 0.0;
    for (int i = 1; i <= n_peak; ++i) {
        const double s0 = static_cast<double>(i - 1) / n_peak;
        const double s1 = static_cast<double>(i) / n_peak;
        z += integrate([&](double s) { return w.width_density_peak(s); }, s0, s1, kQuadTol, "profile (peak chart)");
        const double u = (i == n_peak) ? w.u_mid() : w.u_max - gap * s1 * s1;
        prof.half_.push_back({z, u});
    }
    for (int j = 1; j <= n_edge; ++j) {
        const double t0 = 1.0 - static_cast<double>(j - 1) / n_edge;
        const double t1 = 1.0 - static_cast<double>(j) / n_edge;
        z += integrate([&](double t) { return w.width_density_edge(t); }, t1, t0, kQuadTol, "profile (edge chart)");
        prof.half_.push_back({z, w.u_mid() * std::pow(t1, k)});
    }
    prof.half_width_L = z;

    for (std::size_t i = prof.half_.size() - 1; i >= 1; --i) {
        prof.z_samples.push_back(-prof.half_[i].z);
        prof.u_samples.push_back(prof.half_[i].u);
    }
    for (const auto& node : prof.half_) {
        prof.z_samples.push_back(node.z);
        prof.u_samples.push_back(node.u);
    }

    // a* in u: sqrt(2) integral sqrt(W) du over both charts.
    const double a_peak = integrate(
        [&](double s) {
            const double u = w.u_max - gap * s * s;
            return std::pow(u, 0.5 * w.r) * s * std::sqrt(gap * (w.u_2 - u)) * 2.0 * gap * s;
        },
        0.0, 1.0, kQuadTol, "a_star (peak chart)");
    const double a_edge = integrate(
        [&](double t) {
            const double u = w.u_mid() * std::pow(t, k);
            return std::sqrt(w.value(u)) * w.u_mid() * k * std::pow(t, k - 1.0);
        },
        0.0, 1.0, kQuadTol, "a_star (edge chart)");
    prof.a_star = std::sqrt(2.0) * (a_peak + a_edge);

    // b* in z: integral of W(U(z)) over the interpolated pulse, panel by panel.
    double b_half = 0.0;
    for (std::size_t i = 0; i + 1 < prof.half_.size(); ++i) {
        b_half += integrate([&](double zz) { return eval_well(prof.value(zz), params); }, prof.half_[i].z,
                            prof.half_[i + 1].z, 1e-13, "b_star", 1e-18);
    }
    prof.b_star = 2.0 * b_half;
    return prof;
}

template <int Order>
double BilayerProfile::evaluate(double z) const {
    const double az = std::abs(z);
    if (az >= half_width_L) return 0.0;
    auto it = std::upper_bound(half_.begin(), half_.end(), az, [](double v, const Node& n) { return v < n.z; });
    const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - half_.begin()), half_.size() - 1);
    const std::size_t lo = hi - 1;
    auto node = [&](std::size_t i) {
        const double u = half_[i].u;
        return HermiteNode{u, -std::sqrt(2.0 * well_.value(u)), eval_dwell(u, params_)};
    };
    const HermiteEval e = quintic_hermite(half_[lo].z, half_[hi].z, node(lo), node(hi), az);
    if constexpr (Order == 0) return e.f;
    if constexpr (Order == 1) return z >= 0.0 ? e.d1 : -e.d1;
    return e.d2;
}

double BilayerProfile::value(double z) const { return evaluate<0>(z); }
double BilayerProfile::slope(double z) const { return evaluate<1>(z); }
double BilayerProfile::curvature(double z) const { return evaluate<2>(z); }

double BilayerProfile::mass_per_length() const {
    const FactoredWell& w = well_;
    const double gap = w.u_max - w.u_mid();
    const double k = w.edge_exponent();
    const double peak = integrate(
        [&](double s) { return (w.u_max - gap * s * s) * w.width_density_peak(s); }, 0.0, 1.0, kQuadTol, "mass");
    const double edge = integrate(
        [&](double t) { return w.u_mid() * std::pow(t, k) * w.width_density_edge(t); }, 0.0, 1.0, kQuadTol, "mass");
    return 2.0 * (peak + edge);
}

void write_profile_csv(std::ostream& out, const BilayerProfile& profile) {
    nlohmann::json header{{"kind", "bilayer"},
                          {"params", profile.params()},
                          {"L", profile.half_width_L},
                          {"u_max", profile.u_max},
                          {"a_star", profile.a_star},
                          {"b_star", profile.b_star},
                          {"samples", profile.z_samples.size()}};
    out << header.dump() << "\n" << "z,u\n";
    char line[96];
    for (std::size_t i = 0; i < profile.z_samples.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", profile.z_samples[i], profile.u_samples[i]);
        out << line;
    }
}

}  // namespace fch
