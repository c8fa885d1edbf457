#pragma once

#include <array>
#include <span>
#include <vector>

namespace fch {

// Fornberg's recursion: w[d][k] is the weight of f(x[k]) in the d-th derivative at x0, d <= m.
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x, int m);

// Five-point first and second derivative stencils for every node of one axis. Periodic axes
// wrap (the window is centered); other axes shift the window inward near the ends.
struct AxisStencil {
    std::vector<std::array<int, 5>> idx;
    std::vector<std::array<double, 5>> d1;
    std::vector<std::array<double, 5>> d2;

    std::size_t size() const { return idx.size(); }
};

AxisStencil make_axis_stencil(const std::vector<double>& nodes, bool periodic, double period);

}  // namespace fch
