#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <json.hpp>

#include "fch/interface_geometry.hpp"
#include "fch/potential.hpp"

namespace fch {

// Samples of u~(s, z) on a tubular grid, laid out as values[s_index * nz + k].
struct Field {
    std::shared_ptr<const TubularGrid> grid;
    std::vector<double> values;

    double eps() const { return grid->eps; }
    double& at(std::size_t s, std::size_t k) { return values[s * grid->nz() + k]; }
    double at(std::size_t s, std::size_t k) const { return values[s * grid->nz() + k]; }
};

// Field from f(geometric sample, z).
Field make_field(std::shared_ptr<const TubularGrid> grid, const std::function<double(const GeomSample&, double)>& f);

// Throws DataError when the field has NaN, negative values below -tol, or is nonzero at z = +-ell.
void check_admissible(const Field& field, double tol = 1e-10);

struct EnergyReport {
    double total = 0.0;
    double quadratic_part = 0.0;   // integral of (1/2)(-eps Lap u + W'(u)/eps)^2 J
    double functional_part = 0.0;  // integral of (eta1 eps^2/2 |D u|^2 + eta2 W(u)) J
    double mass = 0.0;             // integral of u J
    double equipartition_defect = 0.0;  // integral of |u_z^2/2 - W(u)| ds dz
    double bilayer_residual = 0.0;      // || -u_zz + W'(u) ||_2 over ds dz
    double norm_u_lp = 0.0;
    double norm_uz_l2 = 0.0;
    double norm_us_l2 = 0.0;   // sum over tangential directions of ||u_{s_j}||_2
    double norm_uss_l2 = 0.0;  // sum over tangential directions of ||u_{s_j s_j}||_2
    double eps = 0.0;
};

void to_json(nlohmann::json& j, const EnergyReport& r);

struct LaplacianOptions {
    // Include the terms carrying tangential derivatives of the curvatures.
    bool curvature_gradient = true;
};

// Components of D u in the orthonormal frame (T_1, T_2, n); unused tangential slots are 0.
std::vector<std::array<double, 3>> curvilinear_gradient(const Field& field);

std::vector<double> curvilinear_laplacian(const Field& field, const LaplacianOptions& options = {});

// -eps Lap u + W'(u)/eps at every node.
std::vector<double> cahn_hilliard_residual(const Field& field, const WellParams& params);

// sqrt(sum w_s w_z v^2) with trapezoid weights in z and surface weights in s (no Jacobian).
double surface_l2_norm(const TubularGrid& grid, const std::vector<double>& values);

EnergyReport fch_energy(const Field& field, double eta1, double eta2, const WellParams& params);

// a* integral H0^2 - (eta1 + eta2) b* |Gamma|.
double g1_energy(const InterfaceGeom& geom, double a_star, double b_star, double eta1, double eta2);
// integral over Gamma of a*(s) H0^2 - (eta1 + eta2) b*(s).
double g1_energy(const InterfaceGeom& geom, const std::function<double(const Param&)>& a_star,
                 const std::function<double(const Param&)>& b_star, double eta1, double eta2, int count = 1024);

struct LowerBoundAudit {
    double lhs = 0.0;  // the energy
    double rhs = 0.0;  // integral{(1/4) r^2 + eta1 eps^2/2 |D u|^2 + A1 |u|^p} J - A2 integral J
    double a1 = 0.0;
    double a2 = 0.0;
    double volume = 0.0;  // integral of J
    bool holds = false;
};

// Explicit constants: A1 = C1 (eta1 p - eta2) - eps^2 eta1^2, A2 = max(0, -(eta1 C4 - eta2 C)) with
// C = C3 for eta2 >= 0 and C = C2 for eta2 < 0. InapplicableError if eta2 >= p eta1 or A1 <= 0.
LowerBoundAudit lower_bound_audit(const Field& field, double eta1, double eta2, const WellParams& params,
                                  const GrowthConstants& growth);

// Worker threads for the energy loops, from FCH_THREADS (default 1).
int configured_threads();

}  // namespace fch
