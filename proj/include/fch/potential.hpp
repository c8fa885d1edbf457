#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace fch {

// C^2 piecewise-quintic bump: 1 on [knots[1], knots[2]], 0 outside (knots[0], knots[3]),
// joined by the monotone smoothstep 6t^5 - 15t^4 + 10t^3.
struct Cutoff {
    std::array<double, 4> knots{-2.0, -1.0, 2.0, 3.0};
    int degree = 5;

    static Cutoff for_well(double u_plus);

    double value(double u) const;
    double derivative(double u) const;
    bool is_one(double u) const { return u >= knots[1] && u <= knots[2]; }
    bool is_zero(double u) const { return u <= knots[0] || u >= knots[3]; }
};

// Parameters of the non-smooth double well
//   W(u) = chi(u)|u|^r((u-u+)^2 + tau(u - (1+r)/r u+)) + c5 (1-chi(u))|u|^p.
struct WellParams {
    double r = 1.75;
    double u_plus = 1.0;
    double tau = 0.25;
    double p = 3.0;
    double c5 = 1.0;
    Cutoff cutoff = Cutoff::for_well(1.0);

    // The default parameter set with c5 chosen by `default_c5`.
    static WellParams defaults();
    // Build a parameter set with the cutoff placed for `u_plus` and c5 audited.
    static WellParams make(double r, double u_plus, double tau, double p);

    // Throws DomainError when an invariant fails; `ambient_n` bounds p from above.
    void validate(int ambient_n = 3) const;

    // The quadratic factor (u-u+)^2 + tau(u - (1+r)/r u+) of the closed-form branch.
    double bracket(double u) const;
    double bracket_derivative(double u) const;
};

// Smallest power of two for which W' has no zeros outside [0, u+] on a verification grid
// over [-1e3, 1e3].
double default_c5(double r, double u_plus, double tau, double p);

double eval_well(double u, const WellParams& params);
double eval_dwell(double u, const WellParams& params);

// Constants of the growth inequalities
//   C1|u|^p + C2 <= W(u) <= C1|u|^p + C3,  |W'(u)| <= C1 p|u|^(p-1) + C3',
//   C1 p|u|^p + C4 <= W'(u) u.
struct GrowthConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c3p = 0.0;
    double c4 = 0.0;
};

struct GrowthAudit {
    std::optional<GrowthConstants> constants;  // empty when infeasible
    std::vector<double> violations;            // u values that rule out every positive C1
    std::string reason;

    bool feasible() const { return constants.has_value(); }
};

// Grid-based audit. C1 is fixed by the far field (where chi = 0); the offsets are then the
// smallest-magnitude values that make every inequality hold on the grid.
GrowthAudit audit_growth(const WellParams& params, std::span<const double> grid);

// Grid used by the default audit: [-10 u+, 10 u+] densely plus far-field samples.
std::vector<double> default_audit_grid(const WellParams& params);

void to_json(nlohmann::json& j, const WellParams& params);
void from_json(const nlohmann::json& j, WellParams& params);
void to_json(nlohmann::json& j, const GrowthConstants& g);

}  // namespace fch
