// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file solve.hpp
 * @brief Ground-state front end choosing between exact diagonalisation and DMRG.
 */

#pragma once

#include <rydcrit/dense_state.hpp>
#include <rydcrit/dmrg.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/hamiltonian.hpp>
#include <rydcrit/lattice_basis.hpp>
#include <rydcrit/mpo.hpp>
#include <rydcrit/wavefunction.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace rydcrit {

enum class SolverBackend { automatic, dense, lanczos, dmrg };

[[nodiscard]] inline std::string_view to_string(SolverBackend b) noexcept {
    switch (b) {
        case SolverBackend::automatic: return "auto";
        case SolverBackend::dense: return "dense";
        case SolverBackend::lanczos: return "lanczos";
        case SolverBackend::dmrg: return "dmrg";
    }
    return "auto";
}

inline SolverBackend parse_backend(std::string_view s) {
    if (s == "auto") return SolverBackend::automatic;
    if (s == "dense") return SolverBackend::dense;
    if (s == "lanczos") return SolverBackend::lanczos;
    if (s == "dmrg") return SolverBackend::dmrg;
    throw ConfigError("unknown solver backend '" + std::string(s) + "' (expected auto|dense|lanczos|dmrg)");
}

/// Largest basis the automatic choice hands to exact diagonalisation.
inline constexpr std::uint64_t kAutoExactDimension = std::uint64_t{1} << 21;

struct SolverConfig {
    SolverBackend backend = SolverBackend::automatic;
    GroundStateOptions exact;
    DmrgConfig dmrg;
};

struct SolveResult {
    Wavefunction state;
    double energy = 0.0;
    SolverBackend backend = SolverBackend::dense;
    nlohmann::json info;   ///< backend diagnostics for reports
};

/// Backend the automatic choice picks for a geometry.
[[nodiscard]] inline SolverBackend resolve_backend(SolverBackend requested, const ChainGeometry& g) {
    if (requested != SolverBackend::automatic) return requested;
    if (!g.fits_bitmask()) return SolverBackend::dmrg;
    if (!g.hard() && g.length > kMaxPenaltyLength) return SolverBackend::dmrg;
    const auto dim = expected_dimension(g);
    if (dim > kAutoExactDimension) return SolverBackend::dmrg;
    return dim <= 1024 ? SolverBackend::dense : SolverBackend::lanczos;
}

[[nodiscard]] inline SolveResult solve_ground_state(const HamiltonianParams& params, const ChainGeometry& g,
                                                    const SolverConfig& cfg, std::uint64_t seed) {
    params.validate();
    g.validate();
    SolveResult out;
    out.backend = resolve_backend(cfg.backend, g);
    if (out.backend == SolverBackend::dmrg) {
        const auto r = dmrg_ground_state(build_mpo(params, g), cfg.dmrg, seed);
        if (!r.converged)
            throw ConvergenceError("DMRG did not converge in " + std::to_string(r.sweeps) + " sweeps (dE=" +
                                       std::to_string(r.delta_energy) + ", dS=" + std::to_string(r.delta_entropy) + ")",
                                   r.delta_energy);
        out.energy = r.energy;
        out.info = {{"sweeps", r.sweeps},
                    {"delta_energy", r.delta_energy},
                    {"delta_entropy", r.delta_entropy},
                    {"max_bond", r.state.max_bond()},
                    {"max_truncation", r.history.empty() ? 0.0 : r.history.back().max_truncation}};
        out.state = r.state;
        return out;
    }
    auto basis = make_basis(g);
    const auto H = build_hamiltonian(params, g, *basis);
    GroundStateOptions opts = cfg.exact;
    opts.seed = seed;
    const auto r = out.backend == SolverBackend::dense ? ground_state_dense(H, basis, opts)
                                                       : ground_state_lanczos(H, basis, opts);
    out.energy = r.energy;
    out.info = {{"dimension", basis->dimension()},
                {"first_excited", r.first_excited},
                {"residual", r.residual},
                {"matvecs", r.matvecs}};
    out.state = r.state;
    return out;
}

} // namespace rydcrit
