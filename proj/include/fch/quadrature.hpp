#pragma once

#include <functional>
#include <vector>

namespace fch {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. Subdivides the interval with the
// largest error estimate until error <= max(abs_tol, rel_tol |value|).
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol = 1e-12, double abs_tol = 0.0, int max_intervals = 4000);

// Same, but throws NumericalError (with `what` as context) when the tolerance is not met.
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 const char* what, double abs_tol = 0.0);

// Single 15-point Kronrod panel.
double kronrod15(const std::function<double(double)>& f, double a, double b);

struct GaussRule {
    std::vector<double> nodes;    // on (-1, 1), ascending
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule by Newton iteration on P_n.
GaussRule gauss_legendre(int n);

}  // namespace fch
