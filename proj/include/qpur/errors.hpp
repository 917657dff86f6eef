#pragma once

#include <stdexcept>
#include <string>

namespace qpur {

// Base for every numeric/validation failure surfaced by the library.
// kind() is the stable machine-readable tag used in CLI JSON errors.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidDimension : Error {
    explicit InvalidDimension(const std::string& m) : Error("invalid-dimension", m) {}
};
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& m) : Error("dimension-mismatch", m) {}
};
struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& m) : Error("invalid-argument", m) {}
};
struct InvalidState : Error {
    explicit InvalidState(const std::string& m) : Error("invalid-state", m) {}
};
struct IntegrationBlowup : Error {
    explicit IntegrationBlowup(const std::string& m) : Error("integration-blowup", m) {}
};
struct QuadratureError : Error {
    explicit QuadratureError(const std::string& m) : Error("quadrature-error", m) {}
};
struct CostGuard : Error {
    explicit CostGuard(const std::string& m) : Error("cost-guard", m) {}
};
struct Unreachable : Error {
    explicit Unreachable(const std::string& m) : Error("target-unreachable", m) {}
};
struct RefineGrid : Error {
    explicit RefineGrid(const std::string& m) : Error("refine-grid", m) {}
};

} // namespace qpur
