// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file wavefunction.hpp
 * @brief Backend-agnostic handle over dense and matrix-product states.
 *
 * Measurement, observable and sampling code accept either representation.
 * The helpers here dispatch on the variant so pipeline code does not have
 * to care which solver produced the state.
 */

#pragma once

#include <rydcrit/dense_state.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/measurement.hpp>
#include <rydcrit/mps.hpp>
#include <rydcrit/observables.hpp>

#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <variant>

namespace rydcrit {

using Wavefunction = std::variant<DenseState, MatrixProductState>;

[[nodiscard]] inline const ChainGeometry& geometry_of(const Wavefunction& psi) {
    return std::visit([](const auto& s) -> const ChainGeometry& { return s.geometry(); }, psi);
}

[[nodiscard]] inline bool is_mps(const Wavefunction& psi) noexcept {
    return std::holds_alternative<MatrixProductState>(psi);
}

[[nodiscard]] inline std::string backend_name(const Wavefunction& psi) { return is_mps(psi) ? "mps" : "dense"; }

[[nodiscard]] inline double norm_of(const Wavefunction& psi) {
    if (const auto* d = std::get_if<DenseState>(&psi)) return d->norm();
    return std::sqrt(norm_squared(std::get<MatrixProductState>(psi)));
}

[[nodiscard]] inline Eigen::VectorXd occupations(const Wavefunction& psi) {
    return std::visit([](const auto& s) { return occupations(s); }, psi);
}

[[nodiscard]] inline OccupationMoments occupation_moments(const Wavefunction& psi) {
    if (const auto* d = std::get_if<DenseState>(&psi)) return occupation_moments(*d);
    return occupation_moments(std::get<MatrixProductState>(psi));
}

[[nodiscard]] inline double sector_probability(const Wavefunction& psi, const OutcomeSector& sector) {
    return std::visit([&](const auto& s) { return sector_probability(s, sector); }, psi);
}

/// Measured state plus the Born weight of the sector (1 for measurements that do not post-select).
struct MeasuredWavefunction {
    Wavefunction state;
    double probability = 1.0;
};

[[nodiscard]] inline MeasuredWavefunction apply_measurement(const Wavefunction& psi, const OutcomeSector* sector,
                                                            const MeasurementSpec& spec) {
    return std::visit(
        [&](const auto& s) {
            double p = 1.0;
            auto out = apply_measurement(s, sector, spec, &p);
            return MeasuredWavefunction{Wavefunction(std::move(out)), p};
        },
        psi);
}

[[nodiscard]] inline ConditionalProbabilities conditional_probabilities(const Wavefunction& psi,
                                                                        const OutcomeSector& sector) {
    return std::visit([&](const auto& s) { return conditional_probabilities(s, sector); }, psi);
}

[[nodiscard]] inline double half_chain_entropy(const Wavefunction& psi, int cut) {
    return std::visit([&](const auto& s) { return half_chain_entropy(s, cut); }, psi);
}

inline void write_checkpoint(std::ostream& os, const Wavefunction& psi) {
    std::visit([&](const auto& s) { write_checkpoint(os, s); }, psi);
}

/// Read either checkpoint flavour, dispatching on the four-byte magic.
[[nodiscard]] inline Wavefunction read_wavefunction(std::istream& is) {
    const auto start = is.tellg();
    if (start == std::istream::pos_type(-1)) throw ConfigError("checkpoint stream is not seekable");
    char magic[4] = {};
    is.read(magic, 4);
    if (!is) throw ConfigError("checkpoint is empty or truncated");
    is.seekg(start);
    if (std::memcmp(magic, "RYDW", 4) == 0) return read_checkpoint(is);
    if (std::memcmp(magic, "RYDM", 4) == 0) return read_mps_checkpoint(is);
    throw ConfigError("unrecognised checkpoint magic '" + std::string(magic, 4) + "'");
}

} // namespace rydcrit
