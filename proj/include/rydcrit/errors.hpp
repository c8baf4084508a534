// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by every module.
 *
 * Each exception carries an ErrorKind so front ends can map failures onto
 * stable process exit codes without string matching.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rydcrit {

enum class ErrorKind {
    config,          ///< invalid input, geometry, pattern or file
    capacity,        ///< dimension or memory budget exceeded
    constraint,      ///< configuration violates the blockade
    convergence,     ///< iterative solver did not converge
    degeneracy,      ///< ground state not unique within tolerance
    zero_probability,///< post-selection sector has vanishing weight
    fit              ///< curve fit or crossing search failed
};

/// Process exit code for each error category (0 is success).
[[nodiscard]] constexpr int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::convergence:
        case ErrorKind::degeneracy:       return 3;
        case ErrorKind::zero_probability: return 4;
        case ErrorKind::fit:              return 5;
        default:                          return 2;
    }
}

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::config:           return "config";
        case ErrorKind::capacity:         return "capacity";
        case ErrorKind::constraint:       return "constraint";
        case ErrorKind::convergence:      return "convergence";
        case ErrorKind::degeneracy:       return "degeneracy";
        case ErrorKind::zero_probability: return "zero_probability";
        case ErrorKind::fit:              return "fit";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& what) : Error(ErrorKind::capacity, what) {}
};

struct ConstraintError : Error {
    explicit ConstraintError(const std::string& what) : Error(ErrorKind::constraint, what) {}
};

/// Thrown when an iterative eigensolver exhausts its budget.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double best_residual)
        : Error(ErrorKind::convergence, what), best_residual(best_residual) {}
    double best_residual;
};

struct DegeneracyError : Error {
    DegeneracyError(const std::string& what, double e0, double e1)
        : Error(ErrorKind::degeneracy, what), ground_energy(e0), first_excited_energy(e1) {}
    double ground_energy;
    double first_excited_energy;
};

struct ZeroProbabilityError : Error {
    ZeroProbabilityError(const std::string& what, double probability)
        : Error(ErrorKind::zero_probability, what), probability(probability) {}
    double probability;
};

struct FitError : Error {
    explicit FitError(const std::string& what) : Error(ErrorKind::fit, what) {}
};

/// Pattern DSL syntax error; `offset` is the byte offset into the source text.
struct ParseError : ConfigError {
    ParseError(const std::string& what, std::size_t offset)
        : ConfigError(what + " at byte " + std::to_string(offset)), offset(offset) {}
    std::size_t offset;
};

} // namespace rydcrit
