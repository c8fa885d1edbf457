#include "fch/interface_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "fch/error.hpp"
#include "fch/quadrature.hpp"

namespace fch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << what << " must be positive and finite, got " << v;
        throw GeometryError(os.str());
    }
}

// Tensor rule over Q with `count` nodes per axis, calling f(param, weight) at each node.
template <class F>
void for_each_surface_node(const InterfaceGeom& geom, int count, F&& f) {
    const AxisRule a0 = geom.axis_rule(0, count);
    if (geom.dims() == 1) {
        for (std::size_t i = 0; i < a0.nodes.size(); ++i) f(Param{a0.nodes[i], 0.0}, a0.weights[i]);
        return;
    }
    const AxisRule a1 = geom.axis_rule(1, count);
    for (std::size_t i = 0; i < a0.nodes.size(); ++i) {
        for (std::size_t k = 0; k < a1.nodes.size(); ++k) {
            f(Param{a0.nodes[i], a1.nodes[k]}, a0.weights[i] * a1.weights[k]);
        }
    }
}

}  // namespace

AxisRule InterfaceGeom::axis_rule(int j, int count) const {
    const ParamAxis ax = axes().at(j);
    AxisRule rule;
    rule.periodic = ax.periodic;
    rule.period = ax.hi - ax.lo;
    if (ax.periodic) {
        for (int i = 0; i < count; ++i) {
            rule.nodes.push_back(ax.lo + rule.period * i / count);
            rule.weights.push_back(rule.period / count);
        }
    } else {
        const GaussRule g = gauss_legendre(count);
        for (int i = 0; i < count; ++i) {
            rule.nodes.push_back(ax.lo + 0.5 * (g.nodes[i] + 1.0) * rule.period);
            rule.weights.push_back(0.5 * g.weights[i] * rule.period);
        }
    }
    return rule;
}

double InterfaceGeom::metric_weight(const Param& s) const {
    double w = 1.0;
    for (int j = 0; j < dims(); ++j) w *= lame(s, j);
    return w;
}

double InterfaceGeom::kappa0() const {
    if (kappa0_cache_ >= 0.0) return kappa0_cache_;
    double k0 = 0.0;
    for_each_surface_node(*this, validation_count(), [&](const Param& s, double) {
        for (int i = 0; i < dims(); ++i) {
            k0 = std::max(k0, std::abs(curvature(s, i)));
            for (int j = 0; j < dims(); ++j) k0 = std::max(k0, std::abs(dcurvature(s, i, j) / lame(s, j)));
        }
    });
    kappa0_cache_ = k0;
    return k0;
}

double InterfaceGeom::area(int count) const {
    if (dims() == 2) count = std::min(count, 512);
    double a = 0.0;
    for_each_surface_node(*this, count, [&](const Param& s, double w) { a += w * metric_weight(s); });
    return a;
}

// Circle.

Circle::Circle(double rho) : rho_(rho) { require_positive(rho, "circle radius"); }
nlohmann::json Circle::to_json() const { return {{"shape", "circle"}, {"rho", rho_}}; }
std::vector<ParamAxis> Circle::axes() const { return {{0.0, kTwoPi, true}}; }
Eigen::Vector3d Circle::position(const Param& s) const { return rho_ * normal(s); }
Eigen::Vector3d Circle::normal(const Param& s) const { return {std::cos(s[0]), std::sin(s[0]), 0.0}; }
double Circle::lame(const Param&, int) const { return rho_; }
double Circle::dlame(const Param&, int, int) const { return 0.0; }
double Circle::curvature(const Param&, int) const { return 1.0 / rho_; }
double Circle::dcurvature(const Param&, int, int) const { return 0.0; }

// Ellipse.

Ellipse::Ellipse(double a, double b) : a_(a), b_(b) {
    require_positive(a, "ellipse semi-axis a");
    require_positive(b, "ellipse semi-axis b");
}
nlohmann::json Ellipse::to_json() const { return {{"shape", "ellipse"}, {"a", a_}, {"b", b_}}; }
std::vector<ParamAxis> Ellipse::axes() const { return {{0.0, kTwoPi, true}}; }
Eigen::Vector3d Ellipse::position(const Param& s) const { return {a_ * std::cos(s[0]), b_ * std::sin(s[0]), 0.0}; }
Eigen::Vector3d Ellipse::normal(const Param& s) const {
    const double h = lame(s, 0);
    return {b_ * std::cos(s[0]) / h, a_ * std::sin(s[0]) / h, 0.0};
}
double Ellipse::lame(const Param& s, int) const {
    const double st = std::sin(s[0]), ct = std::cos(s[0]);
    return std::sqrt(a_ * a_ * st * st + b_ * b_ * ct * ct);
}
double Ellipse::dlame(const Param& s, int, int) const {
    return (a_ * a_ - b_ * b_) * std::sin(s[0]) * std::cos(s[0]) / lame(s, 0);
}
double Ellipse::curvature(const Param& s, int) const {
    const double h = lame(s, 0);
    return a_ * b_ / (h * h * h);
}
double Ellipse::dcurvature(const Param& s, int, int) const {
    const double h = lame(s, 0);
    return -3.0 * a_ * b_ * dlame(s, 0, 0) / (h * h * h * h);
}

// Sphere.

Sphere::Sphere(double rho) : rho_(rho) { require_positive(rho, "sphere radius"); }
nlohmann::json Sphere::to_json() const { return {{"shape", "sphere"}, {"rho", rho_}}; }
std::vector<ParamAxis> Sphere::axes() const { return {{0.0, std::numbers::pi, false}, {0.0, kTwoPi, true}}; }
Eigen::Vector3d Sphere::position(const Param& s) const { return rho_ * normal(s); }
Eigen::Vector3d Sphere::normal(const Param& s) const {
    return {std::sin(s[0]) * std::cos(s[1]), std::sin(s[0]) * std::sin(s[1]), std::cos(s[0])};
}
double Sphere::lame(const Param& s, int j) const { return j == 0 ? rho_ : rho_ * std::sin(s[0]); }
double Sphere::dlame(const Param& s, int i, int j) const {
    return (i == 1 && j == 0) ? rho_ * std::cos(s[0]) : 0.0;
}
double Sphere::curvature(const Param&, int) const { return 1.0 / rho_; }
double Sphere::dcurvature(const Param&, int, int) const { return 0.0; }
AxisRule Sphere::axis_rule(int j, int count) const {
    if (j == 1) return InterfaceGeom::axis_rule(j, count);
    // Gauss-Legendre in cos(theta); the weight absorbs d(cos theta) = sin(theta) d theta.
    const GaussRule g = gauss_legendre(count);
    AxisRule rule;
    rule.periodic = false;
    rule.period = std::numbers::pi;
    for (int i = 0; i < count; ++i) {
        const double theta = std::acos(-g.nodes[i]);
        rule.nodes.push_back(theta);
        rule.weights.push_back(g.weights[i] / std::sin(theta));
    }
    return rule;
}

// Torus.

Torus::Torus(double major, double minor) : R_(major), r_(minor) {
    require_positive(major, "torus major radius R");
    require_positive(minor, "torus minor radius r");
    if (!(minor < major)) throw GeometryError("torus requires r < R");
}
nlohmann::json Torus::to_json() const { return {{"shape", "torus"}, {"R", R_}, {"r", r_}}; }
std::vector<ParamAxis> Torus::axes() const { return {{0.0, kTwoPi, true}, {0.0, kTwoPi, true}}; }
Eigen::Vector3d Torus::position(const Param& s) const {
    const double w = R_ + r_ * std::cos(s[1]);
    return {w * std::cos(s[0]), w * std::sin(s[0]), r_ * std::sin(s[1])};
}
Eigen::Vector3d Torus::normal(const Param& s) const {
    return {std::cos(s[1]) * std::cos(s[0]), std::cos(s[1]) * std::sin(s[0]), std::sin(s[1])};
}
double Torus::lame(const Param& s, int j) const { return j == 0 ? R_ + r_ * std::cos(s[1]) : r_; }
double Torus::dlame(const Param& s, int i, int j) const {
    return (i == 0 && j == 1) ? -r_ * std::sin(s[1]) : 0.0;
}
double Torus::curvature(const Param& s, int j) const {
    return j == 0 ? std::cos(s[1]) / (R_ + r_ * std::cos(s[1])) : 1.0 / r_;
}
double Torus::dcurvature(const Param& s, int i, int j) const {
    if (i != 0 || j != 1) return 0.0;
    const double w = R_ + r_ * std::cos(s[1]);
    return -R_ * std::sin(s[1]) / (w * w);
}

std::shared_ptr<const InterfaceGeom> make_geometry(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("shape")) throw GeometryError("geometry needs a \"shape\" field");
    const std::string shape = j.at("shape").get<std::string>();
    auto num = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number()) {
            throw GeometryError(std::string("geometry '") + shape + "' needs numeric field '" + key + "'");
        }
        return j.at(key).get<double>();
    };
    if (shape == "circle") return std::make_shared<Circle>(num("rho"));
    if (shape == "ellipse") return std::make_shared<Ellipse>(num("a"), num("b"));
    if (shape == "sphere") return std::make_shared<Sphere>(num("rho"));
    if (shape == "torus") return std::make_shared<Torus>(num("R"), num("r"));
    throw GeometryError("unknown shape '" + shape + "'");
}

double jacobian(const InterfaceGeom& geom, const Param& s, double z, double eps) {
    double j = 1.0;
    for (int i = 0; i < geom.dims(); ++i) j *= 1.0 + eps * z * geom.curvature(s, i);
    return j;
}

double total_curvature(const InterfaceGeom& geom, const Param& s) {
    double h = 0.0;
    for (int i = 0; i < geom.dims(); ++i) h += geom.curvature(s, i);
    return h;
}

double bending_integral(const InterfaceGeom& geom, int count) {
    if (geom.dims() == 2) count = std::min(count, 512);
    double b = 0.0;
    for_each_surface_node(geom, count, [&](const Param& s, double w) {
        const double h0 = total_curvature(geom, s);
        b += w * geom.metric_weight(s) * h0 * h0;
    });
    return b;
}

double packing_bound(const InterfaceGeom& geom, double r0) {
    require_positive(r0, "support radius");
    if (geom.dims() == 1) return geom.area() / (2.0 * r0);
    // Hexagonal packing of disks of radius eps r0 on the surface.
    return geom.area() / (2.0 * std::sqrt(3.0) * r0 * r0);
}

namespace {

// Spatial hash for the separation test; cells have side `dist`.
class SeparationIndex {
public:
    explicit SeparationIndex(double dist) : dist_(dist) {}

    bool admissible(const Eigen::Vector3d& x) const {
        const auto c = cell(x);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
                    if (it == cells_.end()) continue;
                    for (const auto& y : it->second)
                        if ((x - y).norm() <= dist_) return false;
                }
        return true;
    }

    void insert(const Eigen::Vector3d& x) {
        const auto c = cell(x);
        cells_[key(c[0], c[1], c[2])].push_back(x);
    }

private:
    double dist_;
    std::unordered_map<std::uint64_t, std::vector<Eigen::Vector3d>> cells_;

    std::array<long, 3> cell(const Eigen::Vector3d& x) const {
        return {static_cast<long>(std::floor(x[0] / dist_)), static_cast<long>(std::floor(x[1] / dist_)),
                static_cast<long>(std::floor(x[2] / dist_))};
    }
    static std::uint64_t key(long a, long b, long c) {
        auto m = [](long v) { return static_cast<std::uint64_t>(v + (1L << 20)) & 0x1fffffULL; };
        return (m(a) << 42) | (m(b) << 21) | m(c);
    }
};

// Parameter values splitting a closed curve into `count` arcs of equal length.
std::vector<double> equal_arc_parameters(const InterfaceGeom& geom, int count) {
    const ParamAxis ax = geom.axes()[0];
    constexpr int panels = 4096;
    const double dt = (ax.hi - ax.lo) / panels;
    auto speed = [&](double t) { return geom.lame(Param{t, 0.0}, 0); };
    std::vector<double> cum(panels + 1, 0.0);
    for (int i = 0; i < panels; ++i) cum[i + 1] = cum[i] + kronrod15(speed, ax.lo + i * dt, ax.lo + (i + 1) * dt);
    const double total = cum.back();
    std::vector<double> out;
    std::size_t panel = 0;
    for (int k = 0; k < count; ++k) {
        const double target = total * k / count;
        while (panel + 1 < static_cast<std::size_t>(panels) && cum[panel + 1] <= target) ++panel;
        const double t0 = ax.lo + panel * dt;
        double t = t0 + dt * (target - cum[panel]) / (cum[panel + 1] - cum[panel]);
        for (int it = 0; it < 8; ++it) {
            const double f = cum[panel] + kronrod15(speed, t0, t) - target;
            t -= f / speed(t);
        }
        out.push_back(t);
    }
    return out;
}

}  // namespace

std::vector<Param> place_micelle_centers(const InterfaceGeom& geom, double eps, double alpha, double r0) {
    require_positive(eps, "eps");
    require_positive(alpha, "alpha");
    require_positive(r0, "support radius");
    const int n = geom.ambient_n();
    const double bound = packing_bound(geom, r0);
    const long count = std::lround(alpha * std::pow(eps, 1.0 - n));
    std::ostringstream why;
    why << "alpha = " << alpha << " with eps = " << eps << " and R0 = " << r0 << " asks for " << count
        << " micelles; packing bound alpha0 = " << bound;
    if (!(alpha < bound)) throw InfeasiblePlacementError(why.str());
    if (count < 1) throw InfeasiblePlacementError(why.str() + " (no micelle at this eps)");

    const double sep = 2.0 * eps * r0;
    SeparationIndex index(sep);
    std::vector<Param> centers;
    if (n == 2) {
        for (double t : equal_arc_parameters(geom, static_cast<int>(count))) {
            const Param s{t, 0.0};
            const Eigen::Vector3d x = geom.position(s);
            if (!index.admissible(x)) throw InfeasiblePlacementError(why.str() + " (equal spacing violates separation)");
            index.insert(x);
            centers.push_back(s);
        }
        return centers;
    }

    // Area-proportional low-discrepancy candidates (R3 sequence) with rejection on area and separation.
    const auto ax = geom.axes();
    double w_max = 0.0;
    for_each_surface_node(geom, 128, [&](const Param& s, double) { w_max = std::max(w_max, geom.metric_weight(s)); });
    w_max *= 1.01;
    constexpr double phi3 = 1.2207440846057594;
    const double g1 = 1.0 / phi3, g2 = 1.0 / (phi3 * phi3), g3 = 1.0 / (phi3 * phi3 * phi3);
    const long budget = 1000 * count + 10000;
    for (long i = 1; i <= budget && static_cast<long>(centers.size()) < count; ++i) {
        const double x1 = std::fmod(0.5 + g1 * i, 1.0);
        const double x2 = std::fmod(0.5 + g2 * i, 1.0);
        const double x3 = std::fmod(0.5 + g3 * i, 1.0);
        const Param s{ax[0].lo + x1 * (ax[0].hi - ax[0].lo), ax[1].lo + x2 * (ax[1].hi - ax[1].lo)};
        if (x3 * w_max > geom.metric_weight(s)) continue;
        const Eigen::Vector3d x = geom.position(s);
        if (!index.admissible(x)) continue;
        index.insert(x);
        centers.push_back(s);
    }
    if (static_cast<long>(centers.size()) < count) {
        why << " (placed only " << centers.size() << ")";
        throw InfeasiblePlacementError(why.str());
    }
    return centers;
}

void validate_tubular(const InterfaceGeom& geom, double eps, double ell) {
    require_positive(eps, "eps");
    require_positive(ell, "ell");
    const double k0 = geom.kappa0();
    if (!(eps * ell * k0 < 0.5)) {
        std::ostringstream os;
        os << "tubular neighborhood too thick: eps * ell * kappa0 = " << eps * ell * k0 << " >= 1/2 (eps = " << eps
           << ", ell = " << ell << ", kappa0 = " << k0 << ")";
        throw GeometryError(os.str());
    }
}

TubularGrid make_tubular_grid(std::shared_ptr<const InterfaceGeom> geom, double eps, double ell,
                              std::array<int, 2> s_counts, int nz) {
    if (!geom) throw GeometryError("no geometry");
    validate_tubular(*geom, eps, ell);
    if (nz < 5) throw GeometryError("need at least 5 z nodes");
    TubularGrid g;
    g.geom = geom;
    g.eps = eps;
    g.ell = ell;
    for (int j = 0; j < geom->dims(); ++j) {
        if (s_counts[j] < 5) throw GeometryError("need at least 5 nodes per parameter axis");
        g.s_axes.push_back(geom->axis_rule(j, s_counts[j]));
    }
    for (int k = 0; k < nz; ++k) g.z_grid.push_back(-ell + 2.0 * ell * k / (nz - 1));

    const std::size_t n0 = g.s_axes[0].nodes.size();
    const std::size_t n1 = geom->dims() == 2 ? g.s_axes[1].nodes.size() : 1;
    g.samples.reserve(n0 * n1);
    for (std::size_t i = 0; i < n0; ++i) {
        for (std::size_t k = 0; k < n1; ++k) {
            GeomSample gs;
            gs.s = {g.s_axes[0].nodes[i], geom->dims() == 2 ? g.s_axes[1].nodes[k] : 0.0};
            double w = g.s_axes[0].weights[i] * (geom->dims() == 2 ? g.s_axes[1].weights[k] : 1.0);
            for (int a = 0; a < geom->dims(); ++a) {
                gs.h[a] = geom->lame(gs.s, a);
                gs.kappa[a] = geom->curvature(gs.s, a);
                for (int b = 0; b < geom->dims(); ++b) {
                    gs.dh[a][b] = geom->dlame(gs.s, a, b);
                    gs.dkappa[a][b] = geom->dcurvature(gs.s, a, b);
                }
                w *= gs.h[a];
                if (!(gs.h[a] > 0.0)) throw GeometryError("degenerate metric on the grid");
            }
            gs.position = geom->position(gs.s);
            gs.normal = geom->normal(gs.s);
            gs.weight = w;
            g.samples.push_back(gs);
        }
    }
    return g;
}

double default_half_thickness(const InterfaceGeom& geom, double support, double eps_max) {
    require_positive(support, "support");
    require_positive(eps_max, "eps");
    const double ell = std::min(2.0 * support, 0.9 / (2.0 * eps_max * geom.kappa0()));
    if (!(ell > support)) {
        std::ostringstream os;
        os << "no admissible half-thickness: profile support " << support << " exceeds 0.9/(2 eps kappa0) = "
           << 0.9 / (2.0 * eps_max * geom.kappa0()) << " at eps = " << eps_max;
        throw GeometryError(os.str());
    }
    return ell;
}

}  // namespace fch
