#pragma once

#include <stdexcept>
#include <string>

namespace fch {

// Base of every error raised by the library. `kind()` is a stable machine-readable tag
// used by the CLI when it reports failures as JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// Argument outside the mathematical domain (non-finite input, invalid parameters).
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error("domain_error", w) {}
};

// The double well admits no compactly supported pulse (no root of the bracket in (0, u+)).
struct InfeasibleWellError : Error {
    explicit InfeasibleWellError(const std::string& w) : Error("infeasible_well", w) {}
};

// Quadrature or integrator failed to reach its tolerance.
struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error("numerical_error", w) {}
};

// Shooting could not bracket a micelle amplitude.
struct NoProfileError : Error {
    explicit NoProfileError(const std::string& w) : Error("no_profile", w) {}
};

// Degenerate tubular metric or thickness bound violated.
struct GeometryError : Error {
    explicit GeometryError(const std::string& w) : Error("geometry_error", w) {}
};

// Too many micelles for the separation constraint.
struct InfeasiblePlacementError : Error {
    explicit InfeasiblePlacementError(const std::string& w) : Error("infeasible_placement", w) {}
};

// Sequence description inconsistent with the grid (pulse leaves the domain, bad schedule).
struct SpecError : Error {
    explicit SpecError(const std::string& w) : Error("spec_error", w) {}
};

// Field data unusable (NaN, negative values, boundary condition violated).
struct DataError : Error {
    explicit DataError(const std::string& w) : Error("data_error", w) {}
};

// Lower-bound audit requested outside the regime where the estimate applies.
struct InapplicableError : Error {
    explicit InapplicableError(const std::string& w) : Error("inapplicable", w) {}
};

}  // namespace fch
