#pragma once

#include <iosfwd>
#include <vector>

#include "fch/bilayer_profile.hpp"
#include "fch/potential.hpp"

namespace fch {

struct MicelleOptions {
    double r_init = 1e-6;         // Taylor start radius
    double amplitude_cap = 0.0;   // upper end of the amplitude bracket; 0 selects 2 u+
    double rel_tol = 1e-13;       // integrator tolerances (extended precision)
    double abs_tol = 1e-22;
    double max_step = 0.01;
    double tail_fraction = 1e-10; // integration stops once U < tail_fraction * amplitude
    double grazing_tol = 1e-9;
    int n_samples = 2001;         // uniform samples on [0, R0]
};

// Radial compacton U(R) of U'' + (n-1)/R U' = W'(U), U'(0) = 0, sampled uniformly on [0, R0].
class MicelleProfile {
public:
    int dim_n = 0;
    double amplitude = 0.0;
    double r0_support = 0.0;
    std::vector<double> r_samples;
    std::vector<double> u_samples;
    std::vector<double> du_samples;
    double sigma_n = 0.0;           // integral_0^R0 U'^2 R^(n-1) dR
    double potential_moment = 0.0;  // integral_0^R0 W(U) R^(n-1) dR along the shot trajectory
    double mass_moment = 0.0;       // integral_0^R0 U R^(n-1) dR
    double grazing_defect = 0.0;    // max(|U|, |U'|) where the trajectory lands
    int bisection_steps = 0;
    WellParams params;

    // Quintic Hermite interpolation of the samples (U'' from the ODE); zero for R >= R0.
    double value(double R) const;
    double slope(double R) const;
    double curvature(double R) const;
};

MicelleProfile shoot_micelle(int dim_n, const WellParams& params, const MicelleOptions& options = {});

// The half pulse of a bilayer viewed as an n = 1 radial profile.
MicelleProfile micelle_from_bilayer(const BilayerProfile& bilayer);

// |integral W(U) R^(n-1) dR - (2-n)/(2n) sigma_n| / sigma_n, integrated over the interpolated samples.
double virial_defect(const MicelleProfile& profile, const WellParams& params);

// Surface measure of the unit sphere in R^n: 2, 2 pi, 4 pi, 2 pi^2.
double unit_sphere_area(int dim_n);

// Rescaled energy of one micelle of width eps:
//   -eps^(n-1) |S^(n-1)| (eta1/2 + (2-n)/(2n) eta2) sigma_n.
double micelle_energy(int dim_n, double eps, double eta1, double eta2, double sigma_n);

void write_micelle_csv(std::ostream& out, const MicelleProfile& profile);

}  // namespace fch
