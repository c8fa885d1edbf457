#include "fch/stencil.hpp"

#include <algorithm>

#include "fch/error.hpp"

namespace fch {

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

AxisStencil make_axis_stencil(const std::vector<double>& nodes, bool periodic, double period) {
    const int n = static_cast<int>(nodes.size());
    if (n < 5) throw DomainError("five-point stencils need at least 5 nodes");
    AxisStencil st;
    st.idx.resize(n);
    st.d1.resize(n);
    st.d2.resize(n);
    for (int i = 0; i < n; ++i) {
        std::array<double, 5> x{};
        int start = periodic ? i - 2 : std::clamp(i - 2, 0, n - 5);
        for (int k = 0; k < 5; ++k) {
            int j = start + k;
            double shift = 0.0;
            if (periodic) {
                if (j < 0) {
                    j += n;
                    shift = -period;
                } else if (j >= n) {
                    j -= n;
                    shift = period;
                }
            }
            st.idx[i][k] = j;
            x[k] = nodes[j] + shift;
        }
        const auto w = fornberg_weights(nodes[i], x, 2);
        for (int k = 0; k < 5; ++k) {
            st.d1[i][k] = w[1][k];
            st.d2[i][k] = w[2][k];
        }
    }
    return st;
}

}  // namespace fch
