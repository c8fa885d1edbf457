#include "fch/micelle_profile.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fch/error.hpp"
#include "fch/hermite.hpp"
#include "fch/quadrature.hpp"

namespace fch {

namespace {

using LD = long double;
using Vec = std::array<LD, 5>;  // U, U', int U'^2 R^(n-1), int W R^(n-1), int U R^(n-1)

// Closed-form branch of W in extended precision. Trajectories stay inside [0, 2u+] where chi = 1.
struct WellLD {
    LD r, up, tau;
    LD bracket(LD u) const { return (u - up) * (u - up) + tau * (u - (1 + r) / r * up); }
    LD value(LD u) const { return std::pow(std::fabs(u), r) * bracket(u); }
    LD derivative(LD u) const {
        const LD a = std::fabs(u);
        if (a == 0) return 0;
        const LD sgn = u > 0 ? 1 : -1;
        return r * std::pow(a, r - 1) * sgn * bracket(u) + std::pow(a, r) * (2 * (u - up) + tau);
    }
};

enum class Fate { Small, Large };

struct Node {
    LD R;
    Vec y;
};

struct Shot {
    Fate fate = Fate::Small;
    LD energy = 0;        // U'^2/2 - W(U) at the landing point
    bool turned = false;  // landed on U' = 0 rather than on the tail threshold
    std::vector<Node> nodes;
};

class Shooter {
public:
    Shooter(int n, const WellParams& p, const MicelleOptions& o, LD cap)
        : n_(n), w_{p.r, p.u_plus, p.tau}, opt_(o), cap_(cap) {}

    LD second_derivative(LD R, LD u, LD v) const {
        if (R == 0) return w_.derivative(u) / n_;
        return w_.derivative(u) - (n_ - 1) * v / R;
    }

    Vec rhs(LD R, const Vec& y) const {
        const LD rn = std::pow(R, static_cast<LD>(n_ - 1));
        return {y[1], second_derivative(R, y[0], y[1]), y[1] * y[1] * rn, w_.value(y[0]) * rn, y[0] * rn};
    }

    Shot run(LD a, bool record) const {
        Shot shot;
        if (w_.derivative(a) >= 0) {
            shot.fate = Fate::Large;  // U rises away from its launch value
            return shot;
        }
        const LD u_tail = static_cast<LD>(opt_.tail_fraction) * a;
        const LD ri = opt_.r_init;
        const LD d = w_.derivative(a);
        const LD n = n_;
        LD R = ri;
        Vec y{a + d * ri * ri / (2 * n), d * ri / n, d * d / (n * n) * std::pow(ri, n + 2) / (n + 2),
              w_.value(a) * std::pow(ri, n) / n, a * std::pow(ri, n) / n};
        if (record) shot.nodes.push_back({R, y});

        LD h = std::min<LD>(1e-3, opt_.max_step);
        for (int iter = 0; iter < 10000000; ++iter) {
            if (R > 1e4) throw NumericalError("micelle trajectory did not land before R = 1e4");
            h = std::min<LD>(h, opt_.max_step);
            LD err = 0;
            const Vec yn = step(R, y, h, &err);
            if (!(err <= 1)) {
                if (!std::isfinite(static_cast<double>(err))) err = 1e10;
                h *= std::max<LD>(0.1, 0.9 * std::pow(err, -0.2L));
                if (h < 1e-30) throw NumericalError("micelle integrator step size underflow");
                continue;
            }
            const bool escape = yn[0] > cap_;
            const bool turn = yn[1] >= 0;
            const bool tail = yn[0] <= u_tail;
            if (escape) {
                shot.fate = Fate::Large;
                return shot;
            }
            if (turn || tail) {
                // Land exactly on the first event inside this step.
                const LD h_turn = turn ? locate(R, y, h, 1, 0) : h;
                const LD h_tail = tail ? locate(R, y, h, 0, u_tail) : h;
                shot.turned = turn && (!tail || h_turn <= h_tail);
                const LD h_land = shot.turned ? h_turn : h_tail;
                const Vec yl = step(R, y, h_land, nullptr);
                shot.energy = 0.5L * yl[1] * yl[1] - w_.value(yl[0]);
                shot.fate = (!shot.turned && shot.energy > 0) ? Fate::Large : Fate::Small;
                if (record) shot.nodes.push_back({R + h_land, yl});
                return shot;
            }
            R += h;
            y = yn;
            if (record) shot.nodes.push_back({R, y});
            h *= std::min<LD>(5, 0.9 * std::pow(std::max<LD>(err, 1e-20L), -0.2L));
        }
        throw NumericalError("micelle integrator exceeded its step budget");
    }

private:
    int n_;
    WellLD w_;
    MicelleOptions opt_;
    LD cap_;

    Vec step(LD R, const Vec& y, LD h, LD* err) const {
        static constexpr LD a21 = 1.0L / 5;
        static constexpr LD a31 = 3.0L / 40, a32 = 9.0L / 40;
        static constexpr LD a41 = 44.0L / 45, a42 = -56.0L / 15, a43 = 32.0L / 9;
        static constexpr LD a51 = 19372.0L / 6561, a52 = -25360.0L / 2187, a53 = 64448.0L / 6561,
                            a54 = -212.0L / 729;
        static constexpr LD a61 = 9017.0L / 3168, a62 = -355.0L / 33, a63 = 46732.0L / 5247, a64 = 49.0L / 176,
                            a65 = -5103.0L / 18656;
        static constexpr LD b1 = 35.0L / 384, b3 = 500.0L / 1113, b4 = 125.0L / 192, b5 = -2187.0L / 6784,
                            b6 = 11.0L / 84;
        static constexpr LD e1 = 71.0L / 57600, e3 = -71.0L / 16695, e4 = 71.0L / 1920, e5 = -17253.0L / 339200,
                            e6 = 22.0L / 525, e7 = -1.0L / 40;
        auto comb = [&](std::initializer_list<std::pair<LD, const Vec*>> terms) {
            Vec out = y;
            for (std::size_t i = 0; i < out.size(); ++i) {
                LD acc = 0;
                for (const auto& [c, k] : terms) acc += c * (*k)[i];
                out[i] += h * acc;
            }
            return out;
        };
        const Vec k1 = rhs(R, y);
        const Vec k2 = rhs(R + h / 5, comb({{a21, &k1}}));
        const Vec k3 = rhs(R + 3 * h / 10, comb({{a31, &k1}, {a32, &k2}}));
        const Vec k4 = rhs(R + 4 * h / 5, comb({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Vec k5 = rhs(R + 8 * h / 9, comb({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Vec k6 = rhs(R + h, comb({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const Vec yn = comb({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        if (err) {
            const Vec k7 = rhs(R + h, yn);
            LD sum = 0;
            for (std::size_t i = 0; i < yn.size(); ++i) {
                const LD e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const LD sc = opt_.abs_tol + opt_.rel_tol * std::max(std::fabs(y[i]), std::fabs(yn[i]));
                sum += (e / sc) * (e / sc);
            }
            *err = std::sqrt(sum / yn.size());
        }
        return yn;
    }

    // Step length in (0, h] at which component `comp` of a single step reaches `target`.
    LD locate(LD R, const Vec& y, LD h, int comp, LD target) const {
        auto g = [&](LD s) { return step(R, y, s, nullptr)[comp] - target; };
        LD lo = 0, hi = h;
        LD glo = y[comp] - target, ghi = g(h);
        if (glo * ghi > 0) return hi;
        for (int it = 0; it < 200 && hi - lo > 4 * LDBL_EPSILON * (R + h); ++it) {
            LD mid = lo - glo * (hi - lo) / (ghi - glo);
            if (!(mid > lo && mid < hi) || it % 3 == 2) mid = 0.5L * (lo + hi);
            const LD gm = g(mid);
            if (gm == 0) return mid;
            if ((gm < 0) == (glo < 0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        return hi;
    }
};

std::size_t interval_index(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    hi = std::clamp<std::size_t>(hi, 1, xs.size() - 1);
    return hi - 1;
}

}  // namespace

double unit_sphere_area(int dim_n) {
    if (dim_n < 1) throw DomainError("dimension must be at least 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim_n) / std::tgamma(0.5 * dim_n);
}

MicelleProfile shoot_micelle(int dim_n, const WellParams& params, const MicelleOptions& options) {
    if (dim_n < 1 || dim_n > 4) throw DomainError("micelle dimension must lie in 1..4");
    params.validate(std::max(dim_n, 1));
    const double u_max = peak_amplitude(params);
    const double cap = options.amplitude_cap > 0.0 ? options.amplitude_cap : 2.0 * params.u_plus;
    if (cap > params.cutoff.knots[2]) throw DomainError("amplitude cap must stay inside the region where chi = 1");
    if (!(cap > u_max)) throw DomainError("amplitude cap must exceed the bilayer peak");

    const Shooter shooter(dim_n, params, options, static_cast<LD>(cap));
    // The lower end sits just below u_max so that n = 1, whose amplitude is u_max itself, is bracketed.
    LD lo = static_cast<LD>(u_max) * (1 - 1e-3L);
    LD hi = cap;
    int steps = 0;
    if (shooter.run(lo, false).fate != Fate::Small || shooter.run(hi, false).fate != Fate::Large) {
        bool found = false;
        constexpr int seeds = 64;
        LD prev = lo;
        Fate prev_fate = shooter.run(prev, false).fate;
        for (int i = 1; i <= seeds && !found; ++i) {
            const LD a = lo + (static_cast<LD>(cap) - lo) * i / seeds;
            const Fate f = shooter.run(a, false).fate;
            if (prev_fate == Fate::Small && f == Fate::Large) {
                lo = prev;
                hi = a;
                found = true;
            }
            prev = a;
            prev_fate = f;
        }
        if (!found) {
            std::ostringstream os;
            os << "no amplitude in (" << u_max << ", " << cap << ") separates turning from crossing trajectories";
            throw NoProfileError(os.str());
        }
    }
    while (hi - lo > 2 * LDBL_EPSILON * hi && steps < 200) {
        const LD mid = 0.5L * (lo + hi);
        if (shooter.run(mid, false).fate == Fate::Small) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++steps;
    }

    Shot shot = shooter.run(lo, true);
    const WellLD w{params.r, params.u_plus, params.tau};
    const Node& land = shot.nodes.back();
    const LD b0 = w.bracket(0);
    const LD rr = params.r;
    LD defect;
    if (shot.turned) {
        defect = std::fabs(land.y[0]);
    } else {
        // The trajectory would turn where W(U) = |E| (E < 0 on this side).
        defect = std::max(std::pow(std::fabs(shot.energy) / b0, 1 / rr), std::fabs(land.y[0]));
    }

    MicelleProfile prof;
    prof.dim_n = dim_n;
    prof.params = params;
    prof.amplitude = static_cast<double>(lo);
    prof.bisection_steps = steps;
    prof.grazing_defect = static_cast<double>(defect);

    // Closed-form compacton tail U = (c (R0 - R))^k from the landing point.
    const LD k = 2 / (2 - rr);
    const LD c = (1 - rr / 2) * std::sqrt(2 * b0);
    const LD u_land = std::max<LD>(land.y[0], 0);
    const LD delta = std::pow(u_land, 1 - rr / 2) / c;
    const LD r_land = land.R;
    const LD r0 = r_land + delta;
    const LD weight = std::pow(r_land, static_cast<LD>(dim_n - 1));
    const LD tail_s = weight * k * k * std::pow(c, 2 * k) * std::pow(delta, 2 * k - 1) / (2 * k - 1);
    const LD tail_m = weight * std::pow(c, k) * std::pow(delta, k + 1) / (k + 1);
    prof.r0_support = static_cast<double>(r0);
    prof.sigma_n = static_cast<double>(land.y[2] + tail_s);
    prof.potential_moment = static_cast<double>(land.y[3] + 0.5L * tail_s);
    prof.mass_moment = static_cast<double>(land.y[4] + tail_m);

    const int ns = std::max(options.n_samples, 17);
    const LD a = lo;
    const LD d0 = w.derivative(a);
    std::size_t seg = 0;
    for (int i = 0; i < ns; ++i) {
        const LD R = (i == ns - 1) ? r0 : r0 * i / (ns - 1);
        LD u, du;
        if (R <= static_cast<LD>(options.r_init)) {
            u = a + d0 * R * R / (2 * dim_n);
            du = d0 * R / dim_n;
        } else if (R < r_land) {
            while (seg + 2 < shot.nodes.size() && shot.nodes[seg + 1].R < R) ++seg;
            const Node& n0 = shot.nodes[seg];
            const Node& n1 = shot.nodes[seg + 1];
            const HermiteNode h0{static_cast<double>(n0.y[0]), static_cast<double>(n0.y[1]),
                                 static_cast<double>(shooter.second_derivative(n0.R, n0.y[0], n0.y[1]))};
            const HermiteNode h1{static_cast<double>(n1.y[0]), static_cast<double>(n1.y[1]),
                                 static_cast<double>(shooter.second_derivative(n1.R, n1.y[0], n1.y[1]))};
            const HermiteEval e = quintic_hermite(static_cast<double>(n0.R), static_cast<double>(n1.R), h0, h1,
                                                  static_cast<double>(R));
            u = e.f;
            du = e.d1;
        } else {
            const LD t = std::max<LD>(r0 - R, 0);
            u = std::pow(c * t, k);
            du = -k * c * std::pow(c * t, k - 1);
        }
        prof.r_samples.push_back(static_cast<double>(R));
        prof.u_samples.push_back(static_cast<double>(u));
        prof.du_samples.push_back(static_cast<double>(du));
    }
    prof.u_samples.back() = 0.0;
    prof.du_samples.back() = 0.0;
    if (!(prof.sigma_n > 0.0)) throw NumericalError("micelle surface tension is not positive");
    return prof;
}

MicelleProfile micelle_from_bilayer(const BilayerProfile& bilayer) {
    MicelleProfile prof;
    prof.dim_n = 1;
    prof.params = bilayer.params();
    prof.amplitude = bilayer.u_max;
    prof.r0_support = bilayer.half_width_L;
    for (std::size_t i = 0; i < bilayer.z_samples.size(); ++i) {
        const double z = bilayer.z_samples[i];
        if (z < 0.0) continue;
        prof.r_samples.push_back(z);
        prof.u_samples.push_back(bilayer.u_samples[i]);
        prof.du_samples.push_back(bilayer.slope(z));
    }
    prof.du_samples.front() = 0.0;
    prof.du_samples.back() = 0.0;
    prof.sigma_n = bilayer.a_star;
    prof.potential_moment = 0.5 * bilayer.b_star;
    prof.mass_moment = 0.5 * bilayer.mass_per_length();
    return prof;
}

namespace {

HermiteEval micelle_eval(const MicelleProfile& p, double R) {
    if (R >= p.r0_support || p.r_samples.size() < 2) return {0.0, 0.0, 0.0};
    R = std::max(R, 0.0);
    const std::size_t i = interval_index(p.r_samples, R);
    auto node = [&](std::size_t j) {
        const double r = p.r_samples[j];
        const double dw = eval_dwell(p.u_samples[j], p.params);
        const double d2 = r == 0.0 ? dw / p.dim_n : dw - (p.dim_n - 1) * p.du_samples[j] / r;
        return HermiteNode{p.u_samples[j], p.du_samples[j], d2};
    };
    return quintic_hermite(p.r_samples[i], p.r_samples[i + 1], node(i), node(i + 1), R);
}

}  // namespace

double MicelleProfile::value(double R) const { return micelle_eval(*this, R).f; }
double MicelleProfile::slope(double R) const { return micelle_eval(*this, R).d1; }
double MicelleProfile::curvature(double R) const { return micelle_eval(*this, R).d2; }

double virial_defect(const MicelleProfile& profile, const WellParams& params) {
    const int n = profile.dim_n;
    double lhs = 0.0;
    for (std::size_t i = 0; i + 1 < profile.r_samples.size(); ++i) {
        lhs += kronrod15(
            [&](double R) { return eval_well(profile.value(R), params) * std::pow(R, n - 1); },
            profile.r_samples[i], profile.r_samples[i + 1]);
    }
    const double rhs = (2.0 - n) / (2.0 * n) * profile.sigma_n;
    return std::abs(lhs - rhs) / profile.sigma_n;
}

double micelle_energy(int dim_n, double eps, double eta1, double eta2, double sigma_n) {
    if (dim_n < 1) throw DomainError("micelle dimension must be at least 1");
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    if (!(sigma_n > 0.0)) throw DomainError("sigma_n must be positive");
    const double n = dim_n;
    return -std::pow(eps, n - 1.0) * unit_sphere_area(dim_n) * (0.5 * eta1 + (2.0 - n) / (2.0 * n) * eta2) * sigma_n;
}

void write_micelle_csv(std::ostream& out, const MicelleProfile& profile) {
    nlohmann::json header{{"kind", "micelle"},
                          {"dim_n", profile.dim_n},
                          {"params", profile.params},
                          {"amplitude", profile.amplitude},
                          {"R0", profile.r0_support},
                          {"sigma_n", profile.sigma_n},
                          {"virial_defect", virial_defect(profile, profile.params)},
                          {"grazing_defect", profile.grazing_defect},
                          {"samples", profile.r_samples.size()}};
    out << header.dump() << "\n" << "R,u\n";
    char line[96];
    for (std::size_t i = 0; i < profile.r_samples.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", profile.r_samples[i], profile.u_samples[i]);
        out << line;
    }
}

}  // namespace fch
