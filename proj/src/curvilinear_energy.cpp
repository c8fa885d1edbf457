#include "fch/curvilinear_energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "fch/error.hpp"
#include "fch/stencil.hpp"

namespace fch {

int configured_threads() {
    if (const char* env = std::getenv("FCH_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return std::min(n, 256);
    }
    return 1;
}

namespace {

// Runs f(i) for i in [0, n). Each index owns its output slot, so results do not depend on the
// thread count.
template <class F>
void for_slices(std::size_t n, F&& f) {
    const int threads = std::min<int>(configured_threads(), static_cast<int>(std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct Derivs {
    double u = 0.0, uz = 0.0, uzz = 0.0;
    std::array<double, 2> ut{}, utt{};
};

class Differ {
public:
    explicit Differ(const Field& f) : f_(f), g_(*f.grid) {
        if (f.values.size() != g_.s_count() * g_.nz()) throw DataError("field size does not match its grid");
        z_ = make_axis_stencil(g_.z_grid, false, 0.0);
        for (const auto& ax : g_.s_axes) s_.push_back(make_axis_stencil(ax.nodes, ax.periodic, ax.period));
        n1_ = g_.s_axes.size() == 2 ? g_.s_axes[1].nodes.size() : 1;
    }

    Derivs at(std::size_t s, std::size_t k) const {
        Derivs d;
        const std::size_t nz = g_.nz();
        const double* col = f_.values.data() + s * nz;
        d.u = col[k];
        for (int m = 0; m < 5; ++m) {
            const double v = col[z_.idx[k][m]];
            d.uz += z_.d1[k][m] * v;
            d.uzz += z_.d2[k][m] * v;
        }
        const std::size_t i0 = s / n1_, i1 = s % n1_;
        for (int m = 0; m < 5; ++m) {
            const double v = f_.values[(static_cast<std::size_t>(s_[0].idx[i0][m]) * n1_ + i1) * nz + k];
            d.ut[0] += s_[0].d1[i0][m] * v;
            d.utt[0] += s_[0].d2[i0][m] * v;
        }
        if (s_.size() == 2) {
            for (int m = 0; m < 5; ++m) {
                const double v = f_.values[(i0 * n1_ + s_[1].idx[i1][m]) * nz + k];
                d.ut[1] += s_[1].d1[i1][m] * v;
                d.utt[1] += s_[1].d2[i1][m] * v;
            }
        }
        return d;
    }

private:
    const Field& f_;
    const TubularGrid& g_;
    AxisStencil z_;
    std::vector<AxisStencil> s_;
    std::size_t n1_ = 1;
};

struct Metric {
    std::array<double, 2> q{1.0, 1.0};
    std::array<double, 2> H{1.0, 1.0};
    double J = 1.0;
};

Metric metric_at(const GeomSample& gs, int dims, double zeta) {
    Metric m;
    for (int j = 0; j < dims; ++j) {
        m.q[j] = 1.0 + zeta * gs.kappa[j];
        if (!(m.q[j] > 0.0)) throw GeometryError("degenerate tubular metric: 1 + eps z kappa <= 0");
        m.H[j] = gs.h[j] * m.q[j];
        m.J *= m.q[j];
    }
    return m;
}

double laplacian_at(const Derivs& d, const GeomSample& gs, const Metric& m, int dims, double eps, double zeta,
                    bool curvature_gradient) {
    double lap = d.uzz / (eps * eps);
    for (int j = 0; j < dims; ++j) lap += gs.kappa[j] / m.q[j] * d.uz / eps;
    auto dlog = [&](int i, int j) {
        double v = gs.dh[i][j] / gs.h[i];
        if (curvature_gradient) v += zeta * gs.dkappa[i][j] / m.q[i];
        return v;
    };
    for (int j = 0; j < dims; ++j) {
        double coef = -dlog(j, j);
        for (int i = 0; i < dims; ++i)
            if (i != j) coef += dlog(i, j);
        lap += (d.utt[j] + coef * d.ut[j]) / (m.H[j] * m.H[j]);
    }
    return lap;
}

double z_weight(const TubularGrid& g, std::size_t k) {
    return (k == 0 || k + 1 == g.nz()) ? 0.5 * g.dz() : g.dz();
}

void require_finite_field(const Field& f) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw DataError("field contains non-finite values");
}

struct Sums {
    double quad = 0, func = 0, mass = 0, equi = 0, res2 = 0, lp = 0, uz2 = 0;
    std::array<double, 2> us2{}, uss2{};
    double bound = 0, volume = 0;
};

std::vector<Sums> accumulate(const Field& field, double eta1, double eta2, const WellParams& params, double a1) {
    const TubularGrid& g = *field.grid;
    const Differ differ(field);
    const int dims = g.geom->dims();
    const double eps = g.eps;
    std::vector<Sums> slices(g.s_count());
    for_slices(g.s_count(), [&](std::size_t s) {
        const GeomSample& gs = g.samples[s];
        Sums acc;
        for (std::size_t k = 0; k < g.nz(); ++k) {
            const double zeta = eps * g.z_grid[k];
            const Metric m = metric_at(gs, dims, zeta);
            const Derivs d = differ.at(s, k);
            const double w = gs.weight * z_weight(g, k);
            const double W = eval_well(d.u, params);
            const double dW = eval_dwell(d.u, params);
            const double lap = laplacian_at(d, gs, m, dims, eps, zeta, true);
            const double r = -eps * lap + dW / eps;
            double grad2 = d.uz * d.uz / (eps * eps);
            for (int j = 0; j < dims; ++j) grad2 += (d.ut[j] / m.H[j]) * (d.ut[j] / m.H[j]);
            const double wj = w * m.J;
            acc.quad += 0.5 * r * r * wj;
            acc.func += (0.5 * eta1 * eps * eps * grad2 + eta2 * W) * wj;
            acc.mass += d.u * wj;
            acc.equi += std::abs(0.5 * d.uz * d.uz - W) * w;
            const double bl = -d.uzz + dW;
            acc.res2 += bl * bl * w;
            acc.lp += std::pow(std::abs(d.u), params.p) * w;
            acc.uz2 += d.uz * d.uz * w;
            for (int j = 0; j < dims; ++j) {
                const double us = d.ut[j] / gs.h[j];
                const double uss = d.utt[j] / (gs.h[j] * gs.h[j]) - gs.dh[j][j] * d.ut[j] / (gs.h[j] * gs.h[j] * gs.h[j]);
                acc.us2[j] += us * us * w;
                acc.uss2[j] += uss * uss * w;
            }
            acc.bound += (0.25 * r * r + 0.5 * eta1 * eps * eps * grad2 + a1 * std::pow(std::abs(d.u), params.p)) * wj;
            acc.volume += wj;
        }
        slices[s] = acc;
    });
    return slices;
}

Sums reduce(const std::vector<Sums>& slices) {
    Sums t;
    for (const Sums& s : slices) {
        t.quad += s.quad;
        t.func += s.func;
        t.mass += s.mass;
        t.equi += s.equi;
        t.res2 += s.res2;
        t.lp += s.lp;
        t.uz2 += s.uz2;
        for (int j = 0; j < 2; ++j) {
            t.us2[j] += s.us2[j];
            t.uss2[j] += s.uss2[j];
        }
        t.bound += s.bound;
        t.volume += s.volume;
    }
    return t;
}

}  // namespace

Field make_field(std::shared_ptr<const TubularGrid> grid, const std::function<double(const GeomSample&, double)>& f) {
    Field field;
    field.grid = std::move(grid);
    const TubularGrid& g = *field.grid;
    field.values.resize(g.s_count() * g.nz());
    for_slices(g.s_count(), [&](std::size_t s) {
        for (std::size_t k = 0; k < g.nz(); ++k) field.values[s * g.nz() + k] = f(g.samples[s], g.z_grid[k]);
    });
    return field;
}

void check_admissible(const Field& field, double tol) {
    require_finite_field(field);
    const TubularGrid& g = *field.grid;
    for (std::size_t s = 0; s < g.s_count(); ++s) {
        for (std::size_t k = 0; k < g.nz(); ++k) {
            if (field.at(s, k) < -tol) throw DataError("field takes negative values");
        }
        if (std::abs(field.at(s, 0)) > tol || std::abs(field.at(s, g.nz() - 1)) > tol) {
            throw DataError("field does not vanish at z = +-ell");
        }
    }
}

void to_json(nlohmann::json& j, const EnergyReport& r) {
    j = nlohmann::json{{"eps", r.eps},
                       {"total", r.total},
                       {"quadratic_part", r.quadratic_part},
                       {"functional_part", r.functional_part},
                       {"mass", r.mass},
                       {"equipartition_defect", r.equipartition_defect},
                       {"bilayer_residual", r.bilayer_residual},
                       {"norm_u_lp", r.norm_u_lp},
                       {"norm_uz_l2", r.norm_uz_l2},
                       {"norm_us_l2", r.norm_us_l2},
                       {"norm_uss_l2", r.norm_uss_l2}};
}

std::vector<std::array<double, 3>> curvilinear_gradient(const Field& field) {
    const TubularGrid& g = *field.grid;
    const Differ differ(field);
    const int dims = g.geom->dims();
    std::vector<std::array<double, 3>> out(field.values.size());
    for_slices(g.s_count(), [&](std::size_t s) {
        for (std::size_t k = 0; k < g.nz(); ++k) {
            const Metric m = metric_at(g.samples[s], dims, g.eps * g.z_grid[k]);
            const Derivs d = differ.at(s, k);
            auto& v = out[s * g.nz() + k];
            for (int j = 0; j < dims; ++j) v[j] = d.ut[j] / m.H[j];
            v[2] = d.uz / g.eps;
        }
    });
    return out;
}

std::vector<double> curvilinear_laplacian(const Field& field, const LaplacianOptions& options) {
    const TubularGrid& g = *field.grid;
    const Differ differ(field);
    const int dims = g.geom->dims();
    std::vector<double> out(field.values.size());
    for_slices(g.s_count(), [&](std::size_t s) {
        for (std::size_t k = 0; k < g.nz(); ++k) {
            const double zeta = g.eps * g.z_grid[k];
            const Metric m = metric_at(g.samples[s], dims, zeta);
            out[s * g.nz() + k] =
                laplacian_at(differ.at(s, k), g.samples[s], m, dims, g.eps, zeta, options.curvature_gradient);
        }
    });
    return out;
}

std::vector<double> cahn_hilliard_residual(const Field& field, const WellParams& params) {
    require_finite_field(field);
    std::vector<double> out = curvilinear_laplacian(field);
    const double eps = field.eps();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -eps * out[i] + eval_dwell(field.values[i], params) / eps;
    return out;
}

double surface_l2_norm(const TubularGrid& g, const std::vector<double>& values) {
    double acc = 0.0;
    for (std::size_t s = 0; s < g.s_count(); ++s) {
        for (std::size_t k = 0; k < g.nz(); ++k) {
            const double v = values[s * g.nz() + k];
            acc += g.samples[s].weight * z_weight(g, k) * v * v;
        }
    }
    return std::sqrt(acc);
}

EnergyReport fch_energy(const Field& field, double eta1, double eta2, const WellParams& params) {
    require_finite_field(field);
    if (!std::isfinite(eta1) || !std::isfinite(eta2)) throw DomainError("eta coefficients must be finite");
    const Sums t = reduce(accumulate(field, eta1, eta2, params, 0.0));
    EnergyReport r;
    r.eps = field.eps();
    r.quadratic_part = t.quad;
    r.functional_part = t.func;
    r.total = t.quad - t.func;
    r.mass = t.mass;
    r.equipartition_defect = t.equi;
    r.bilayer_residual = std::sqrt(t.res2);
    r.norm_u_lp = std::pow(t.lp, 1.0 / params.p);
    r.norm_uz_l2 = std::sqrt(t.uz2);
    r.norm_us_l2 = std::sqrt(t.us2[0]) + std::sqrt(t.us2[1]);
    r.norm_uss_l2 = std::sqrt(t.uss2[0]) + std::sqrt(t.uss2[1]);
    return r;
}

double g1_energy(const InterfaceGeom& geom, double a_star, double b_star, double eta1, double eta2) {
    if (a_star < 0.0 || b_star < 0.0) throw DomainError("shape constants must be nonnegative");
    return a_star * bending_integral(geom) - (eta1 + eta2) * b_star * geom.area();
}

double g1_energy(const InterfaceGeom& geom, const std::function<double(const Param&)>& a_star,
                 const std::function<double(const Param&)>& b_star, double eta1, double eta2, int count) {
    if (geom.dims() == 2) count = std::min(count, 512);
    const AxisRule a0 = geom.axis_rule(0, count);
    const AxisRule a1 = geom.dims() == 2 ? geom.axis_rule(1, count) : AxisRule{{0.0}, {1.0}, true, 0.0};
    double acc = 0.0;
    for (std::size_t i = 0; i < a0.nodes.size(); ++i) {
        for (std::size_t k = 0; k < a1.nodes.size(); ++k) {
            const Param s{a0.nodes[i], a1.nodes[k]};
            const double h0 = total_curvature(geom, s);
            acc += a0.weights[i] * a1.weights[k] * geom.metric_weight(s) *
                   (a_star(s) * h0 * h0 - (eta1 + eta2) * b_star(s));
        }
    }
    return acc;
}

LowerBoundAudit lower_bound_audit(const Field& field, double eta1, double eta2, const WellParams& params,
                                  const GrowthConstants& growth) {
    const double p = params.p;
    if (!(eta2 < p * eta1)) {
        std::ostringstream os;
        os << "lower bound needs eta2 < p eta1 (eta1 = " << eta1 << ", eta2 = " << eta2 << ", p = " << p << ")";
        throw InapplicableError(os.str());
    }
    const double eps = field.eps();
    LowerBoundAudit audit;
    audit.a1 = growth.c1 * (eta1 * p - eta2) - eps * eps * eta1 * eta1;
    if (!(audit.a1 > 0.0)) throw InapplicableError("eps too large: A1 = C1 (eta1 p - eta2) - eps^2 eta1^2 <= 0");
    const double c_w = eta2 >= 0.0 ? growth.c3 : growth.c2;
    audit.a2 = std::max(0.0, -(eta1 * growth.c4 - eta2 * c_w));
    require_finite_field(field);
    const Sums t = reduce(accumulate(field, eta1, eta2, params, audit.a1));
    audit.lhs = t.quad - t.func;
    audit.volume = t.volume;
    audit.rhs = t.bound - audit.a2 * t.volume;
    audit.holds = audit.lhs >= audit.rhs;
    return audit;
}

}  // namespace fch
