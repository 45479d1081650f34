#pragma once

#include <stdexcept>
#include <string>

namespace fairsvi {

// Shape or rank disagreement between tensor operands.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the mathematical domain of an operation (log of a
// non-positive value, tau <= 0, rho_t outside (0,1], ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violation of an API contract (non-scalar backward root, double backward
// misuse, mismatched tapes).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Training produced a non-finite quantity. `term` names the objective term
// or parameter that diverged.
struct DivergenceError : std::runtime_error {
    std::string term;
    DivergenceError(const std::string& term_, const std::string& msg)
        : std::runtime_error(msg), term(term_) {}
};

// Fairness audit cannot be computed (fewer than two populated groups,
// unseen protected category, empty cluster).
struct AuditError : std::runtime_error {
    explicit AuditError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad run configuration: missing files, unparseable keys, invalid values.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dataset ingestion failure: missing column, unparseable cell, schema breach.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fairsvi
