#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fch/bilayer_profile.hpp"
#include "fch/curvilinear_energy.hpp"
#include "fch/interface_geometry.hpp"
#include "fch/micelle_profile.hpp"

namespace fch {

enum class SequenceKind { Bilayer, Micelle };

// How the bilayer profile is laid into the tube:
//   translate  u(s, z) = U(z - p(s))
//   level_set  u(s, z) = U(xi) with xi = z + eps (H0/(n-1)) z^2 / 2, the rescaled level-set
//              coordinate (|x|^2 - rho^2)/(2 rho eps) on circles and spheres.
enum class Embedding { Translate, LevelSet };

struct Resolution {
    int nz = 0;       // 0 picks from dz_target
    int ns = 0;       // nodes per parameter axis; 0 picks automatically
    double dz_target = 0.0;  // 0 picks 0.02 (bilayer) or 0.05 (micelle)
};

struct SequenceSpec {
    SequenceKind kind = SequenceKind::Bilayer;
    std::shared_ptr<const InterfaceGeom> geom;
    std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
    double alpha = 0.5;
    double eta1 = 1.0;
    double eta2 = 1.0;
    WellParams params = WellParams::defaults();
    Embedding embedding = Embedding::Translate;
    // p(s) = translate_amplitude sin(translate_mode t_1)
    double translate_amplitude = 0.0;
    int translate_mode = 1;
    // u -> u (1 + modulation sin(k t)) with k = round(|Gamma| / (2 pi eps)) (curves only)
    double modulation = 0.0;
    double ell = 0.0;  // 0 selects the default half-thickness
    Resolution resolution;

    // Throws SpecError / GeometryError on inconsistent input.
    void validate() const;
};

void to_json(nlohmann::json& j, const SequenceSpec& spec);
void from_json(const nlohmann::json& j, SequenceSpec& spec);

// Profiles shared by every eps of a sequence.
struct SequenceProfiles {
    std::optional<BilayerProfile> bilayer;
    std::optional<MicelleProfile> micelle;
};

SequenceProfiles solve_profiles(const SequenceSpec& spec);

// Half-thickness used for the sequence (spec.ell or the default for its profile support).
double sequence_half_thickness(const SequenceSpec& spec, const SequenceProfiles& profiles);

Field build_bilayer_field(const SequenceSpec& spec, const BilayerProfile& profile, double eps);
// Also returns the number of micelles placed through `count` when given.
Field build_micelle_field(const SequenceSpec& spec, const MicelleProfile& profile, double eps,
                          long* count = nullptr);

struct ConvergenceReport {
    SequenceKind kind = SequenceKind::Bilayer;
    std::vector<double> eps_list;
    std::vector<double> energy_list;
    std::vector<EnergyReport> reports;
    std::vector<long> micelle_counts;  // micelle kind only
    double predicted_limit = 0.0;
    std::optional<double> fitted_rate;        // log-log slope of |energy - limit| over the last 3 eps
    std::optional<double> extrapolated_limit;  // Richardson with the fitted rate
    double ell = 0.0;

    std::vector<double> errors() const;
};

ConvergenceReport run_convergence(const SequenceSpec& spec);
ConvergenceReport run_convergence(const SequenceSpec& spec, const SequenceProfiles& profiles);

// Predicted limits.
double bilayer_limit(const InterfaceGeom& geom, const BilayerProfile& profile, double eta1, double eta2);
double micelle_limit(int dim_n, double alpha, double eta1, double eta2, double sigma_n);

// Accepted: bilayer kind needs a fitted rate >= 0.7 and decreasing errors; micelle kind needs
// the last relative error <= 2%; a single eps is always accepted.
bool convergence_accepted(const ConvergenceReport& report);

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);
void write_convergence_jsonl(std::ostream& out, const ConvergenceReport& report);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct NormLedger {
    std::vector<double> b1;  // norm_u_lp + norm_uz_l2 + eps norm_us_l2
    std::vector<double> b2;  // norm_us_l2 + eps norm_uss_l2
    std::vector<double> b3;  // eps norm_uss_l2
    double c1 = 0.0;         // fitted constant: max b1
    double slope_b1 = 0.0, slope_b2 = 0.0, slope_b3 = 0.0;
    bool b1_bounded = false;  // b1 bounded
    bool b2_bounded = false;  // b2 bounded
    bool b3_vanishes = false;  // b3 -> 0
};

// A column counts as bounded when its log-log slope against eps is >= -0.5 or it vanishes;
// b3 tends to zero when it vanishes or its slope is >= 0.5.
NormLedger verify_norm_bounds(const ConvergenceReport& report);
void to_json(nlohmann::json& j, const NormLedger& ledger);

struct PhaseCell {
    double eta1 = 0.0, eta2 = 0.0;
    bool valid = false;
    double bilayer = 0.0;
    double micelle = 0.0;
    std::string winner;
};

struct PhaseInputs {
    double a_star = 0.0;
    double b_star = 0.0;
    double sigma_n = 0.0;
};

// Grid of eta pairs: n1 x n2 points on [lo1, hi1] x [lo2, hi2].
std::vector<std::pair<double, double>> eta_grid(double lo1, double hi1, int n1, double lo2, double hi2, int n2);

std::vector<PhaseCell> phase_diagram(const InterfaceGeom& geom, double alpha, const PhaseInputs& inputs,
                                     const std::vector<std::pair<double, double>>& etas);
PhaseInputs phase_inputs(const InterfaceGeom& geom, const WellParams& params);

void write_phase_csv(std::ostream& out, const std::vector<PhaseCell>& cells);

// Counts of valid cells by (bilayer sign, micelle sign): [++, +-, -+, --].
std::array<int, 4> phase_sign_counts(const std::vector<PhaseCell>& cells);

// Sphere radius above which (eta1 + eta2) b* 4 pi rho^2 exceeds 16 pi a*.
double sphere_sign_threshold(double a_star, double b_star, double eta1, double eta2);

std::string to_string(SequenceKind kind);

}  // namespace fch
