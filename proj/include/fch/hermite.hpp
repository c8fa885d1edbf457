#pragma once

namespace fch {

// Quintic Hermite interpolation on [x0, x1] from value, first and second derivative at both
// ends. Exact for quintics; O(h^6) for smooth data.
struct HermiteNode {
    double f, d1, d2;
};

struct HermiteEval {
    double f, d1, d2;
};

inline HermiteEval quintic_hermite(double x0, double x1, const HermiteNode& a, const HermiteNode& b, double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;

    const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h20 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
    const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h21 = 0.5 * (t3 - 2 * t4 + t5);

    const double d00 = -30 * t2 + 60 * t3 - 30 * t4;
    const double d10 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    const double d20 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
    const double d01 = 30 * t2 - 60 * t3 + 30 * t4;
    const double d11 = -12 * t2 + 28 * t3 - 15 * t4;
    const double d21 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);

    const double s00 = -60 * t + 180 * t2 - 120 * t3;
    const double s10 = -36 * t + 96 * t2 - 60 * t3;
    const double s20 = 0.5 * (2 - 18 * t + 36 * t2 - 20 * t3);
    const double s01 = 60 * t - 180 * t2 + 120 * t3;
    const double s11 = -24 * t + 84 * t2 - 60 * t3;
    const double s21 = 0.5 * (6 * t - 24 * t2 + 20 * t3);

    HermiteEval e;
    e.f = h00 * a.f + h * h10 * a.d1 + h * h * h20 * a.d2 + h01 * b.f + h * h11 * b.d1 + h * h * h21 * b.d2;
    e.d1 = (d00 * a.f + h * d10 * a.d1 + h * h * d20 * a.d2 + d01 * b.f + h * d11 * b.d1 + h * h * d21 * b.d2) / h;
    e.d2 = (s00 * a.f + h * s10 * a.d1 + h * h * s20 * a.d2 + s01 * b.f + h * s11 * b.d1 + h * h * s21 * b.d2) /
           (h * h);
    return e;
}

}  // namespace fch
