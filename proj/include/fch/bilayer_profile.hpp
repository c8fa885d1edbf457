#pragma once

#include <iosfwd>
#include <vector>

#include "fch/potential.hpp"

namespace fch {

// Closed-form branch of W on [0, u_max] written through the roots of the bracket,
// W(u) = u^r (u_max - u)(u_2 - u). Used by every quadrature in u so that neither endpoint
// suffers cancellation.
struct FactoredWell {
    double r = 0.0;
    double u_max = 0.0;  // smaller positive root of the bracket (the pulse peak)
    double u_2 = 0.0;    // larger root, beyond u+

    static FactoredWell from(const WellParams& params);

    double value(double u) const;  // W(u) for 0 <= u <= u_max
    // Split point between the two substitution charts.
    double u_mid() const { return 0.5 * u_max; }
    // Exponent k of the edge chart u = u_mid t^k, chosen so du / sqrt(2W) is regular at t = 0.
    double edge_exponent() const { return 2.0 / (2.0 - r); }

    // dz/dt for the edge chart u = u_mid t^k, t in [0, 1].
    double width_density_edge(double t) const;
    // dz/ds for the peak chart u = u_max - (u_max - u_mid) s^2, s in [0, 1].
    double width_density_peak(double s) const;
};

// Smallest positive root of the bracket. Throws InfeasibleWellError when the bracket has no
// root in (0, u+), i.e. when tau >= r u+ / (1 + r).
double peak_amplitude(const WellParams& params);

// Critical depth parameter above which no pulse exists.
double critical_tau(const WellParams& params);

// L = integral_0^{u_max} du / sqrt(2 W(u)), both endpoint singularities removed by substitution.
double half_width(const WellParams& params);

// The compactly supported single-pulse solution of U'' = W'(U) on [-L, L], built from the
// first integral rather than by integrating through the non-Lipschitz edge.
class BilayerProfile {
public:
    double u_max = 0.0;
    double half_width_L = 0.0;
    std::vector<double> z_samples;  // strictly increasing on [-L, L]
    std::vector<double> u_samples;
    double a_star = 0.0;  // sqrt(2) integral_0^{u_max} sqrt(W) du
    double b_star = 0.0;  // integral_{-L}^{L} W(U(z)) dz

    const WellParams& params() const { return params_; }

    // U and its derivatives at any z; zero outside [-L, L].
    double value(double z) const;
    double slope(double z) const;
    double curvature(double z) const;

    // Mass per unit interface length, integral_{-L}^{L} U dz, computed in u.
    double mass_per_length() const;

    friend BilayerProfile solve_profile(const WellParams& params, int n_samples);

private:
    struct Node {
        double z;
        double u;
    };
    // Half-pulse table on [0, L], z ascending, u descending.
    std::vector<Node> half_;
    WellParams params_;
    FactoredWell well_;

    template <int Order>
    double evaluate(double z) const;
};

BilayerProfile solve_profile(const WellParams& params, int n_samples = 512);

// Two-column CSV with a JSON header line.
void write_profile_csv(std::ostream& out, const BilayerProfile& profile);

}  // namespace fch
