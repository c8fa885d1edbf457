#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace fch {

// Parameter point on Q; only the first n-1 entries are used.
using Param = std::array<double, 2>;

struct ParamAxis {
    double lo = 0.0;
    double hi = 0.0;
    bool periodic = true;
};

// Quadrature nodes and weights on one parameter axis.
struct AxisRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    bool periodic = true;
    double period = 0.0;
};

// Closed interface in R^2 or R^3 parametrized along lines of curvature. Parameters need not be
// arc length: h_j is the Lame factor |d phi / d t_j| and all surface integrals carry prod_j h_j.
// Ambient points are returned as 3-vectors (third component 0 in the plane).
class InterfaceGeom {
public:
    virtual ~InterfaceGeom() = default;

    virtual int ambient_n() const = 0;
    virtual std::string shape() const = 0;
    virtual nlohmann::json to_json() const = 0;
    virtual std::vector<ParamAxis> axes() const = 0;

    virtual Eigen::Vector3d position(const Param& s) const = 0;
    virtual Eigen::Vector3d normal(const Param& s) const = 0;
    virtual double lame(const Param& s, int j) const = 0;
    // d h_i / d t_j
    virtual double dlame(const Param& s, int i, int j) const = 0;
    virtual double curvature(const Param& s, int j) const = 0;
    // d kappa_i / d t_j (parameter derivative)
    virtual double dcurvature(const Param& s, int i, int j) const = 0;

    // Quadrature rule with `count` nodes on axis j; uniform for periodic axes.
    virtual AxisRule axis_rule(int j, int count) const;
    // Validation grid size per axis.
    virtual int validation_count() const { return 1024; }

    int dims() const { return ambient_n() - 1; }
    double metric_weight(const Param& s) const;
    // max over the validation grid of |kappa_j| and |d kappa_j / d s_i| (arc-length derivative).
    double kappa0() const;
    // |Gamma| by quadrature.
    double area(int count = 2048) const;

protected:
    mutable double kappa0_cache_ = -1.0;
};

class Circle : public InterfaceGeom {
public:
    explicit Circle(double rho);
    int ambient_n() const override { return 2; }
    std::string shape() const override { return "circle"; }
    nlohmann::json to_json() const override;
    std::vector<ParamAxis> axes() const override;
    Eigen::Vector3d position(const Param& s) const override;
    Eigen::Vector3d normal(const Param& s) const override;
    double lame(const Param& s, int j) const override;
    double dlame(const Param& s, int i, int j) const override;
    double curvature(const Param& s, int j) const override;
    double dcurvature(const Param& s, int i, int j) const override;
    double rho() const { return rho_; }

private:
    double rho_;
};

class Ellipse : public InterfaceGeom {
public:
    Ellipse(double a, double b);
    int ambient_n() const override { return 2; }
    std::string shape() const override { return "ellipse"; }
    nlohmann::json to_json() const override;
    std::vector<ParamAxis> axes() const override;
    Eigen::Vector3d position(const Param& s) const override;
    Eigen::Vector3d normal(const Param& s) const override;
    double lame(const Param& s, int j) const override;
    double dlame(const Param& s, int i, int j) const override;
    double curvature(const Param& s, int j) const override;
    double dcurvature(const Param& s, int i, int j) const override;

private:
    double a_, b_;
};

// theta in (0, pi) is the non-periodic axis (Gauss-Legendre in cos theta), phi is periodic.
class Sphere : public InterfaceGeom {
public:
    explicit Sphere(double rho);
    int ambient_n() const override { return 3; }
    std::string shape() const override { return "sphere"; }
    nlohmann::json to_json() const override;
    std::vector<ParamAxis> axes() const override;
    Eigen::Vector3d position(const Param& s) const override;
    Eigen::Vector3d normal(const Param& s) const override;
    double lame(const Param& s, int j) const override;
    double dlame(const Param& s, int i, int j) const override;
    double curvature(const Param& s, int j) const override;
    double dcurvature(const Param& s, int i, int j) const override;
    AxisRule axis_rule(int j, int count) const override;
    double rho() const { return rho_; }

private:
    double rho_;
};

// u runs around the symmetry axis, v around the tube.
class Torus : public InterfaceGeom {
public:
    Torus(double major, double minor);
    int ambient_n() const override { return 3; }
    std::string shape() const override { return "torus"; }
    nlohmann::json to_json() const override;
    std::vector<ParamAxis> axes() const override;
    Eigen::Vector3d position(const Param& s) const override;
    Eigen::Vector3d normal(const Param& s) const override;
    double lame(const Param& s, int j) const override;
    double dlame(const Param& s, int i, int j) const override;
    double curvature(const Param& s, int j) const override;
    double dcurvature(const Param& s, int i, int j) const override;
    int validation_count() const override { return 256; }

private:
    double R_, r_;
};

// {"shape":"circle","rho":..}, {"shape":"ellipse","a":..,"b":..}, {"shape":"sphere","rho":..},
// {"shape":"torus","R":..,"r":..}. Throws GeometryError on unknown shapes or bad parameters.
std::shared_ptr<const InterfaceGeom> make_geometry(const nlohmann::json& j);

// prod_j (1 + eps z kappa_j) = sum_j eps^j K_j z^j.
double jacobian(const InterfaceGeom& geom, const Param& s, double z, double eps);
double total_curvature(const InterfaceGeom& geom, const Param& s);
// integral over Gamma of H0^2.
double bending_integral(const InterfaceGeom& geom, int count = 4096);

// Densest alpha for which N = round(alpha eps^(1-n)) balls of radius eps r0 fit on Gamma.
double packing_bound(const InterfaceGeom& geom, double r0);

// N = round(alpha eps^(1-n)) parameter points with pairwise ambient distance > 2 eps r0.
std::vector<Param> place_micelle_centers(const InterfaceGeom& geom, double eps, double alpha, double r0);

// Per-node geometric data cached on a tubular grid.
struct GeomSample {
    Param s{};
    std::array<double, 2> h{};
    std::array<std::array<double, 2>, 2> dh{};  // dh[i][j] = d h_i / d t_j
    std::array<double, 2> kappa{};
    std::array<std::array<double, 2>, 2> dkappa{};
    Eigen::Vector3d position;
    Eigen::Vector3d normal;
    double weight = 0.0;  // quadrature weight in parameter space times prod h_j
};

// Tensor grid on Q x [-ell, ell]. Flat s index = i0 * N1 + i1.
struct TubularGrid {
    std::shared_ptr<const InterfaceGeom> geom;
    double ell = 0.0;
    double eps = 0.0;
    std::vector<AxisRule> s_axes;
    std::vector<double> z_grid;
    std::vector<GeomSample> samples;

    std::size_t s_count() const { return samples.size(); }
    std::size_t nz() const { return z_grid.size(); }
    double dz() const { return z_grid[1] - z_grid[0]; }
    std::size_t axis_count(int j) const { return s_axes[j].nodes.size(); }
    std::size_t flat(std::size_t i0, std::size_t i1) const { return s_axes.size() == 1 ? i0 : i0 * axis_count(1) + i1; }
};

// Throws GeometryError unless eps * ell * kappa0 < 1/2, ell > 0 and every axis has at least 5 nodes.
void validate_tubular(const InterfaceGeom& geom, double eps, double ell);

TubularGrid make_tubular_grid(std::shared_ptr<const InterfaceGeom> geom, double eps, double ell,
                              std::array<int, 2> s_counts, int nz);

// min(2 support, 0.9 / (2 eps_max kappa0)); GeometryError if that does not exceed `support`.
double default_half_thickness(const InterfaceGeom& geom, double support, double eps_max);

}  // namespace fch
