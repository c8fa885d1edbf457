#include "fch/sequence_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "fch/error.hpp"

namespace fch {

std::string to_string(SequenceKind kind) { return kind == SequenceKind::Bilayer ? "bilayer" : "micelle"; }

namespace {

std::string to_string(Embedding e) { return e == Embedding::Translate ? "translate" : "level_set"; }

double max_lame(const InterfaceGeom& geom, int axis) {
    double m = 0.0;
    const AxisRule a0 = geom.axis_rule(0, 64);
    const AxisRule a1 = geom.dims() == 2 ? geom.axis_rule(1, 64) : AxisRule{{0.0}, {1.0}, true, 0.0};
    for (double t0 : a0.nodes)
        for (double t1 : a1.nodes) m = std::max(m, geom.lame(Param{t0, t1}, axis));
    return m;
}

int modulation_wavenumber(const SequenceSpec& spec, double eps) {
    return static_cast<int>(std::lround(spec.geom->area() / (2.0 * std::numbers::pi * eps)));
}

std::array<int, 2> s_counts(const SequenceSpec& spec, double eps) {
    const InterfaceGeom& geom = *spec.geom;
    std::array<int, 2> counts{1, 1};
    for (int j = 0; j < geom.dims(); ++j) {
        int n = spec.resolution.ns;
        if (n <= 0) {
            if (spec.kind == SequenceKind::Micelle) {
                const double dz = spec.resolution.dz_target > 0.0 ? spec.resolution.dz_target : 0.05;
                const ParamAxis ax = geom.axes()[j];
                n = static_cast<int>(std::ceil((ax.hi - ax.lo) * max_lame(geom, j) / (eps * dz)));
            } else if (spec.modulation != 0.0) {
                n = std::max(64, 16 * modulation_wavenumber(spec, eps));
            } else if (spec.translate_amplitude != 0.0) {
                n = 128;
            } else {
                n = 16;
            }
        }
        counts[j] = std::max(n, 8);
    }
    return counts;
}

int z_count(const SequenceSpec& spec, double ell) {
    if (spec.resolution.nz > 0) return spec.resolution.nz;
    double dz = spec.resolution.dz_target;
    if (dz <= 0.0) dz = spec.kind == SequenceKind::Micelle ? 0.05 : 0.02;
    return static_cast<int>(std::ceil(2.0 * ell / dz)) + 1;
}

// Most negative z reached by the level-set embedding of the pulse edge xi = -L.
double level_set_support(double L, double c, double eps) {
    if (c == 0.0) return L;
    const double disc = 1.0 - 2.0 * eps * c * L;
    if (!(disc > 0.0)) return std::numeric_limits<double>::infinity();
    return std::abs((-1.0 + std::sqrt(disc)) / (eps * c));
}

double level_set_coefficient(const InterfaceGeom& geom, const Param& s) {
    return total_curvature(geom, s) / geom.dims();
}

double max_level_set_coefficient(const InterfaceGeom& geom) {
    double m = 0.0;
    const AxisRule a0 = geom.axis_rule(0, 128);
    const AxisRule a1 = geom.dims() == 2 ? geom.axis_rule(1, 64) : AxisRule{{0.0}, {1.0}, true, 0.0};
    for (double t0 : a0.nodes)
        for (double t1 : a1.nodes) m = std::max(m, level_set_coefficient(geom, Param{t0, t1}));
    return m;
}

std::shared_ptr<const TubularGrid> grid_for(const SequenceSpec& spec, double eps, double ell) {
    return std::make_shared<const TubularGrid>(
        make_tubular_grid(spec.geom, eps, ell, s_counts(spec, eps), z_count(spec, ell)));
}

class CenterIndex {
public:
    CenterIndex(std::vector<Eigen::Vector3d> centers, double radius) : centers_(std::move(centers)), radius_(radius) {
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            const auto c = cell(centers_[i]);
            cells_[key(c[0], c[1], c[2])].push_back(i);
        }
    }

    template <class F>
    void visit_near(const Eigen::Vector3d& x, F&& f) const {
        const auto c = cell(x);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
                    if (it == cells_.end()) continue;
                    for (std::size_t i : it->second) {
                        const double d = (x - centers_[i]).norm();
                        if (d < radius_) f(d);
                    }
                }
    }

private:
    std::vector<Eigen::Vector3d> centers_;
    double radius_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;

    std::array<long, 3> cell(const Eigen::Vector3d& x) const {
        return {static_cast<long>(std::floor(x[0] / radius_)), static_cast<long>(std::floor(x[1] / radius_)),
                static_cast<long>(std::floor(x[2] / radius_))};
    }
    static std::uint64_t key(long a, long b, long c) {
        auto m = [](long v) { return static_cast<std::uint64_t>(v + (1L << 20)) & 0x1fffffULL; };
        return (m(a) << 42) | (m(b) << 21) | m(c);
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void SequenceSpec::validate() const {
    if (!geom) throw SpecError("sequence has no geometry");
    if (eps_list.empty()) throw SpecError("eps_list is empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0) || !std::isfinite(eps_list[i])) throw SpecError("eps values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw SpecError("eps_list must be strictly decreasing");
    }
    if (kind == SequenceKind::Micelle) {
        if (!(alpha > 0.0)) throw SpecError("alpha must be positive");
    } else {
        if (embedding == Embedding::LevelSet && translate_amplitude != 0.0) {
            throw SpecError("the level-set embedding cannot be combined with a translate");
        }
        if (modulation != 0.0 && geom->dims() != 1) throw SpecError("modulation is only defined on curves");
    }
    if (!std::isfinite(eta1) || !std::isfinite(eta2)) throw SpecError("eta coefficients must be finite");
    if (ell < 0.0) throw SpecError("ell must be nonnegative");
    params.validate(geom->ambient_n());
}

void to_json(nlohmann::json& j, const SequenceSpec& spec) {
    j = nlohmann::json{{"kind", to_string(spec.kind)},
                       {"geometry", spec.geom ? spec.geom->to_json() : nlohmann::json()},
                       {"eps_list", spec.eps_list},
                       {"alpha", spec.alpha},
                       {"eta1", spec.eta1},
                       {"eta2", spec.eta2},
                       {"well", spec.params},
                       {"embedding", to_string(spec.embedding)},
                       {"translate", {{"amplitude", spec.translate_amplitude}, {"mode", spec.translate_mode}}},
                       {"modulation", spec.modulation},
                       {"ell", spec.ell},
                       {"resolution",
                        {{"nz", spec.resolution.nz}, {"ns", spec.resolution.ns}, {"dz", spec.resolution.dz_target}}}};
}

void from_json(const nlohmann::json& j, SequenceSpec& spec) {
    const std::string kind = j.value("kind", std::string("bilayer"));
    if (kind == "bilayer") {
        spec.kind = SequenceKind::Bilayer;
    } else if (kind == "micelle") {
        spec.kind = SequenceKind::Micelle;
    } else {
        throw SpecError("unknown sequence kind '" + kind + "'");
    }
    spec.geom = make_geometry(j.value("geometry", nlohmann::json{{"shape", "circle"}, {"rho", 1.0}}));
    if (j.contains("eps_list")) spec.eps_list = j.at("eps_list").get<std::vector<double>>();
    spec.alpha = j.value("alpha", spec.alpha);
    spec.eta1 = j.value("eta1", spec.eta1);
    spec.eta2 = j.value("eta2", spec.eta2);
    if (j.contains("well")) spec.params = j.at("well").get<WellParams>();
    const std::string emb = j.value("embedding", std::string("translate"));
    if (emb == "translate") {
        spec.embedding = Embedding::Translate;
    } else if (emb == "level_set") {
        spec.embedding = Embedding::LevelSet;
    } else {
        throw SpecError("unknown embedding '" + emb + "'");
    }
    if (j.contains("translate")) {
        spec.translate_amplitude = j.at("translate").value("amplitude", 0.0);
        spec.translate_mode = j.at("translate").value("mode", 1);
    }
    spec.modulation = j.value("modulation", 0.0);
    spec.ell = j.value("ell", 0.0);
    if (j.contains("resolution")) {
        const auto& r = j.at("resolution");
        spec.resolution.nz = r.value("nz", 0);
        spec.resolution.ns = r.value("ns", 0);
        spec.resolution.dz_target = r.value("dz", 0.0);
    }
}

SequenceProfiles solve_profiles(const SequenceSpec& spec) {
    SequenceProfiles p;
    if (spec.kind == SequenceKind::Bilayer) {
        p.bilayer = solve_profile(spec.params);
    } else {
        p.micelle = shoot_micelle(spec.geom->ambient_n(), spec.params);
    }
    return p;
}

double sequence_half_thickness(const SequenceSpec& spec, const SequenceProfiles& profiles) {
    if (spec.ell > 0.0) return spec.ell;
    const double eps_max = spec.eps_list.front();
    double support;
    if (spec.kind == SequenceKind::Micelle) {
        support = profiles.micelle.value().r0_support;
    } else {
        const double L = profiles.bilayer.value().half_width_L;
        support = L + std::abs(spec.translate_amplitude);
        if (spec.embedding == Embedding::LevelSet) {
            support = level_set_support(L, max_level_set_coefficient(*spec.geom), eps_max);
        }
    }
    return default_half_thickness(*spec.geom, support, eps_max);
}

Field build_bilayer_field(const SequenceSpec& spec, const BilayerProfile& profile, double eps) {
    if (spec.kind != SequenceKind::Bilayer) throw SpecError("bilayer field requested for a micelle sequence");
    SequenceProfiles pr;
    pr.bilayer = profile;
    const double ell = sequence_half_thickness(spec, pr);
    const double L = profile.half_width_L;
    const InterfaceGeom& geom = *spec.geom;
    if (spec.embedding == Embedding::Translate && std::abs(spec.translate_amplitude) + L >= ell) {
        std::ostringstream os;
        os << "translate amplitude " << spec.translate_amplitude << " pushes the pulse (L = " << L
           << ") out of the tube of half-thickness " << ell;
        throw SpecError(os.str());
    }
    const auto grid = grid_for(spec, eps, ell);
    const int k_mod = spec.modulation != 0.0 ? modulation_wavenumber(spec, eps) : 0;
    const double period = geom.axes()[0].hi - geom.axes()[0].lo;
    if (spec.embedding == Embedding::LevelSet) {
        for (const auto& gs : grid->samples) {
            const double c = level_set_coefficient(geom, gs.s);
            if (!(1.0 - eps * c * ell > 0.0) || !(-ell + 0.5 * eps * c * ell * ell < -L)) {
                throw SpecError("level-set embedding leaves the tube or folds over");
            }
        }
    }
    return make_field(grid, [&](const GeomSample& gs, double z) {
        double xi;
        if (spec.embedding == Embedding::LevelSet) {
            xi = z + 0.5 * eps * level_set_coefficient(geom, gs.s) * z * z;
        } else {
            xi = z - spec.translate_amplitude * std::sin(spec.translate_mode * gs.s[0]);
        }
        double u = profile.value(xi);
        if (k_mod != 0) u *= 1.0 + spec.modulation * std::sin(2.0 * std::numbers::pi * k_mod * gs.s[0] / period);
        return u;
    });
}

Field build_micelle_field(const SequenceSpec& spec, const MicelleProfile& profile, double eps, long* count) {
    if (spec.kind != SequenceKind::Micelle) throw SpecError("micelle field requested for a bilayer sequence");
    if (profile.dim_n != spec.geom->ambient_n()) throw SpecError("micelle dimension differs from the ambient dimension");
    SequenceProfiles pr;
    pr.micelle = profile;
    const double ell = sequence_half_thickness(spec, pr);
    if (!(profile.r0_support < ell)) throw SpecError("micelle support exceeds the tube half-thickness");
    const InterfaceGeom& geom = *spec.geom;
    std::vector<Param> centers;
    try {
        centers = place_micelle_centers(geom, eps, spec.alpha, profile.r0_support);
    } catch (const InfeasiblePlacementError& e) {
        throw SpecError(std::string("micelle placement infeasible: ") + e.what());
    }
    if (count) *count = static_cast<long>(centers.size());
    std::vector<Eigen::Vector3d> xs;
    for (const auto& c : centers) xs.push_back(geom.position(c));
    const CenterIndex index(std::move(xs), eps * profile.r0_support);
    const auto grid = grid_for(spec, eps, ell);
    return make_field(grid, [&](const GeomSample& gs, double z) {
        const Eigen::Vector3d x = gs.position + eps * z * gs.normal;
        double u = 0.0;
        index.visit_near(x, [&](double d) { u += profile.value(d / eps); });
        return u;
    });
}

std::vector<double> ConvergenceReport::errors() const {
    std::vector<double> e;
    for (double v : energy_list) e.push_back(std::abs(v - predicted_limit));
    return e;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

double bilayer_limit(const InterfaceGeom& geom, const BilayerProfile& profile, double eta1, double eta2) {
    return g1_energy(geom, profile.a_star, profile.b_star, eta1, eta2);
}

double micelle_limit(int dim_n, double alpha, double eta1, double eta2, double sigma_n) {
    // N = alpha eps^(1-n) micelles, each contributing micelle_energy(eps).
    return alpha * micelle_energy(dim_n, 1.0, eta1, eta2, sigma_n);
}

ConvergenceReport run_convergence(const SequenceSpec& spec) { return run_convergence(spec, solve_profiles(spec)); }

ConvergenceReport run_convergence(const SequenceSpec& spec, const SequenceProfiles& profiles) {
    spec.validate();
    ConvergenceReport rep;
    rep.kind = spec.kind;
    rep.eps_list = spec.eps_list;
    rep.ell = sequence_half_thickness(spec, profiles);
    if (spec.kind == SequenceKind::Bilayer) {
        rep.predicted_limit = bilayer_limit(*spec.geom, profiles.bilayer.value(), spec.eta1, spec.eta2);
    } else {
        rep.predicted_limit =
            micelle_limit(spec.geom->ambient_n(), spec.alpha, spec.eta1, spec.eta2, profiles.micelle.value().sigma_n);
    }
    for (double eps : spec.eps_list) {
        Field field;
        if (spec.kind == SequenceKind::Bilayer) {
            field = build_bilayer_field(spec, profiles.bilayer.value(), eps);
        } else {
            long count = 0;
            field = build_micelle_field(spec, profiles.micelle.value(), eps, &count);
            rep.micelle_counts.push_back(count);
        }
        const EnergyReport r = fch_energy(field, spec.eta1, spec.eta2, spec.params);
        rep.reports.push_back(r);
        rep.energy_list.push_back(r.total);
    }
    const std::size_t n = rep.eps_list.size();
    if (n >= 2) {
        const std::size_t first = n >= 3 ? n - 3 : 0;
        const std::vector<double> err = rep.errors();
        std::vector<double> x(rep.eps_list.begin() + first, rep.eps_list.end());
        std::vector<double> y(err.begin() + first, err.end());
        if (std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; })) {
            const double rate = loglog_slope(x, y);
            if (std::isfinite(rate)) {
                rep.fitted_rate = rate;
                const double ratio = std::pow(rep.eps_list[n - 2] / rep.eps_list[n - 1], rate);
                if (ratio != 1.0) {
                    rep.extrapolated_limit =
                        rep.energy_list[n - 1] + (rep.energy_list[n - 1] - rep.energy_list[n - 2]) / (ratio - 1.0);
                }
            }
        }
    }
    return rep;
}

bool convergence_accepted(const ConvergenceReport& report) {
    const std::vector<double> err = report.errors();
    if (err.size() < 2) return true;
    if (report.kind == SequenceKind::Micelle) {
        return err.back() <= 0.02 * std::abs(report.predicted_limit);
    }
    for (std::size_t i = 1; i < err.size(); ++i)
        if (!(err[i] < err[i - 1])) return false;
    return report.fitted_rate && *report.fitted_rate >= 0.7;
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
    out << "eps,energy,predicted_limit,abs_error,rel_error,fitted_rate,extrapolated_limit,n_micelles,mass,"
           "equipartition_defect,bilayer_residual,norm_u_lp,norm_uz_l2,norm_us_l2,norm_uss_l2\n";
    const std::vector<double> err = report.errors();
    const std::string rate = report.fitted_rate ? fmt(*report.fitted_rate) : "";
    const std::string extrap = report.extrapolated_limit ? fmt(*report.extrapolated_limit) : "";
    for (std::size_t i = 0; i < report.eps_list.size(); ++i) {
        const EnergyReport& r = report.reports[i];
        const double rel = report.predicted_limit != 0.0 ? err[i] / std::abs(report.predicted_limit) : err[i];
        out << fmt(report.eps_list[i]) << ',' << fmt(report.energy_list[i]) << ',' << fmt(report.predicted_limit)
            << ',' << fmt(err[i]) << ',' << fmt(rel) << ',' << rate << ',' << extrap << ','
            << (i < report.micelle_counts.size() ? std::to_string(report.micelle_counts[i]) : std::string()) << ','
            << fmt(r.mass) << ',' << fmt(r.equipartition_defect) << ',' << fmt(r.bilayer_residual) << ','
            << fmt(r.norm_u_lp) << ',' << fmt(r.norm_uz_l2) << ',' << fmt(r.norm_us_l2) << ',' << fmt(r.norm_uss_l2)
            << '\n';
    }
}

void write_convergence_jsonl(std::ostream& out, const ConvergenceReport& report) {
    for (std::size_t i = 0; i < report.reports.size(); ++i) {
        nlohmann::json j = report.reports[i];
        j["kind"] = to_string(report.kind);
        j["predicted_limit"] = report.predicted_limit;
        if (i < report.micelle_counts.size()) j["n_micelles"] = report.micelle_counts[i];
        out << j.dump() << '\n';
    }
}

NormLedger verify_norm_bounds(const ConvergenceReport& report) {
    NormLedger led;
    for (std::size_t i = 0; i < report.reports.size(); ++i) {
        const EnergyReport& r = report.reports[i];
        const double eps = report.eps_list[i];
        led.b1.push_back(r.norm_u_lp + r.norm_uz_l2 + eps * r.norm_us_l2);
        led.b2.push_back(r.norm_us_l2 + eps * r.norm_uss_l2);
        led.b3.push_back(eps * r.norm_uss_l2);
    }
    led.c1 = led.b1.empty() ? 0.0 : *std::max_element(led.b1.begin(), led.b1.end());
    const double scale = std::max(1.0, led.c1);
    auto vanishes = [&](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x <= 1e-8 * scale; });
    };
    auto slope = [&](const std::vector<double>& v) {
        if (v.size() < 2 || vanishes(v)) return 0.0;
        std::vector<double> y;
        for (double x : v) y.push_back(std::max(x, 1e-300));
        return loglog_slope(report.eps_list, y);
    };
    led.slope_b1 = slope(led.b1);
    led.slope_b2 = slope(led.b2);
    led.slope_b3 = slope(led.b3);
    led.b1_bounded = vanishes(led.b1) || led.slope_b1 >= -0.5;
    led.b2_bounded = vanishes(led.b2) || led.slope_b2 >= -0.5;
    led.b3_vanishes = vanishes(led.b3) || led.slope_b3 >= 0.5;
    return led;
}

void to_json(nlohmann::json& j, const NormLedger& l) {
    j = nlohmann::json{{"b1", l.b1},           {"b2", l.b2},           {"b3", l.b3},
                       {"c1", l.c1},           {"slope_b1", l.slope_b1}, {"slope_b2", l.slope_b2},
                       {"slope_b3", l.slope_b3}, {"b1_bounded", l.b1_bounded},    {"b2_bounded", l.b2_bounded},
                       {"b3_vanishes", l.b3_vanishes}};
}

std::vector<std::pair<double, double>> eta_grid(double lo1, double hi1, int n1, double lo2, double hi2, int n2) {
    std::vector<std::pair<double, double>> g;
    if (n1 <= 0 || n2 <= 0) return g;
    for (int i = 0; i < n1; ++i) {
        const double e1 = n1 == 1 ? lo1 : lo1 + (hi1 - lo1) * i / (n1 - 1);
        for (int k = 0; k < n2; ++k) {
            const double e2 = n2 == 1 ? lo2 : lo2 + (hi2 - lo2) * k / (n2 - 1);
            g.emplace_back(e1, e2);
        }
    }
    return g;
}

PhaseInputs phase_inputs(const InterfaceGeom& geom, const WellParams& params) {
    PhaseInputs in;
    const BilayerProfile b = solve_profile(params);
    in.a_star = b.a_star;
    in.b_star = b.b_star;
    in.sigma_n = shoot_micelle(geom.ambient_n(), params).sigma_n;
    return in;
}

std::vector<PhaseCell> phase_diagram(const InterfaceGeom& geom, double alpha, const PhaseInputs& in,
                                     const std::vector<std::pair<double, double>>& etas) {
    const double bend = bending_integral(geom);
    const double area = geom.area();
    std::vector<PhaseCell> cells;
    for (const auto& [e1, e2] : etas) {
        PhaseCell c;
        c.eta1 = e1;
        c.eta2 = e2;
        c.valid = e1 > 0.0 && std::isfinite(e1) && std::isfinite(e2);
        if (c.valid) {
            c.bilayer = in.a_star * bend - (e1 + e2) * in.b_star * area;
            c.micelle = micelle_limit(geom.ambient_n(), alpha, e1, e2, in.sigma_n);
            c.winner = c.micelle < c.bilayer ? "micelle" : (c.bilayer < c.micelle ? "bilayer" : "tie");
        } else {
            c.bilayer = c.micelle = std::numeric_limits<double>::quiet_NaN();
            c.winner = "invalid";
        }
        cells.push_back(c);
    }
    return cells;
}

void write_phase_csv(std::ostream& out, const std::vector<PhaseCell>& cells) {
    out << "eta1,eta2,valid,bilayer_limit,micelle_limit,bilayer_sign,micelle_sign,winner\n";
    auto sign = [](double v) { return v > 0.0 ? "+" : (v < 0.0 ? "-" : "0"); };
    for (const auto& c : cells) {
        out << fmt(c.eta1) << ',' << fmt(c.eta2) << ',' << (c.valid ? 1 : 0) << ',';
        if (c.valid) {
            out << fmt(c.bilayer) << ',' << fmt(c.micelle) << ',' << sign(c.bilayer) << ',' << sign(c.micelle);
        } else {
            out << ",,,";
        }
        out << ',' << c.winner << '\n';
    }
}

std::array<int, 4> phase_sign_counts(const std::vector<PhaseCell>& cells) {
    std::array<int, 4> n{};
    for (const auto& c : cells) {
        if (!c.valid) continue;
        const int idx = (c.bilayer > 0.0 ? 0 : 2) + (c.micelle > 0.0 ? 0 : 1);
        ++n[idx];
    }
    return n;
}

double sphere_sign_threshold(double a_star, double b_star, double eta1, double eta2) {
    const double s = eta1 + eta2;
    if (!(s > 0.0) || !(b_star > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 * std::sqrt(a_star / (b_star * s));
}

}  // namespace fch
