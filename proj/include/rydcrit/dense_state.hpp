// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file dense_state.hpp
 * @brief Dense wavefunctions on a blockaded basis and the exact-diagonalisation backends.
 *
 * Both backends return the lowest eigenpair normalised with the global sign
 * chosen so that the largest-magnitude amplitude is positive, and both refuse
 * to pick silently between (near-)degenerate ground states.
 *
 * Checkpoint layout (all integers little-endian):
 *
 *   "RYDW" | u32 version=1 | u32 L | u8 boundary (0 periodic, 1 open)
 *   | u8 mode (0 hard, 1 penalty) | u16 reserved | u64 dimension
 *   | dimension x f64 amplitudes in basis order
 */

#pragma once

#include <rydcrit/binary_io.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/hamiltonian.hpp>
#include <rydcrit/lanczos.hpp>
#include <rydcrit/lattice_basis.hpp>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>

namespace rydcrit {

using BasisPtr = std::shared_ptr<const BlockadedBasis>;

[[nodiscard]] inline BasisPtr make_basis(const ChainGeometry& g, const BasisOptions& opts = {}) {
    return std::make_shared<const BlockadedBasis>(enumerate_basis(g, opts));
}

struct DenseState {
    BasisPtr basis;
    Eigen::VectorXd amplitudes;

    [[nodiscard]] const ChainGeometry& geometry() const { return basis->geometry(); }
    [[nodiscard]] int length() const { return basis->length(); }
    [[nodiscard]] std::size_t dimension() const { return basis->dimension(); }
    [[nodiscard]] double norm() const { return amplitudes.norm(); }
};

/// Basis vector |c>.
[[nodiscard]] inline DenseState product_state(BasisPtr basis, Config c) {
    DenseState s{basis, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->dimension()))};
    s.amplitudes[static_cast<Eigen::Index>(basis->index_of(c))] = 1.0;
    return s;
}

/// Flip the global sign so the largest-magnitude amplitude is positive.
inline void fix_sign(Eigen::VectorXd& v) {
    if (v.size() == 0) return;
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    if (v[idx] < 0.0) v = -v;
}

[[nodiscard]] inline double overlap(const DenseState& a, const DenseState& b) {
    if (a.amplitudes.size() != b.amplitudes.size()) throw ConfigError("overlap: dimension mismatch");
    return a.amplitudes.dot(b.amplitudes);
}

struct GroundStateOptions {
    double tol = 1e-10;             ///< Lanczos residual target
    std::uint64_t seed = 1;
    std::size_t dense_cap = 4096;   ///< largest dimension accepted by the dense backend
    double degeneracy_tol = 1e-8;   ///< refuse a ground state with E1 - E0 below this
    bool allow_degenerate = false;
    int krylov_dim = 48;
    long max_matvecs = 50000;
};

struct GroundStateResult {
    DenseState state;
    double energy = 0.0;
    double first_excited = 0.0;   ///< next eigenvalue, used by the degeneracy guard
    double residual = 0.0;
    long matvecs = 0;
};

namespace detail {
inline void check_gap(double e0, double e1, const GroundStateOptions& opts) {
    if (!opts.allow_degenerate && std::abs(e1 - e0) < opts.degeneracy_tol)
        throw DegeneracyError("ground state is degenerate within " + std::to_string(opts.degeneracy_tol) +
                                  " (E0=" + std::to_string(e0) + ", E1=" + std::to_string(e1) + ")",
                              e0, e1);
}
} // namespace detail

[[nodiscard]] inline GroundStateResult ground_state_dense(const SparseOperator& H, BasisPtr basis,
                                                          const GroundStateOptions& opts = {}) {
    if (H.dimension() != basis->dimension()) throw ConfigError("operator and basis dimensions differ");
    if (H.dimension() > opts.dense_cap)
        throw CapacityError("dense diagonalisation limited to dimension " + std::to_string(opts.dense_cap) +
                            ", got " + std::to_string(H.dimension()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H.to_dense());
    if (eig.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
    GroundStateResult out;
    out.energy = eig.eigenvalues()[0];
    out.first_excited = H.dimension() > 1 ? eig.eigenvalues()[1] : std::numeric_limits<double>::infinity();
    if (H.dimension() > 1) detail::check_gap(out.energy, out.first_excited, opts);
    Eigen::VectorXd v = eig.eigenvectors().col(0);
    v.normalize();
    fix_sign(v);
    out.state = DenseState{std::move(basis), std::move(v)};
    return out;
}

/**
 * Lowest eigenpair by thick-restart Lanczos with full reorthogonalisation.
 *
 * The two lowest pairs are converged so the degeneracy guard can compare them.
 * Deterministic for a fixed seed.
 */
[[nodiscard]] inline GroundStateResult ground_state_lanczos(const SparseOperator& H, BasisPtr basis,
                                                            const GroundStateOptions& opts = {}) {
    if (H.dimension() != basis->dimension()) throw ConfigError("operator and basis dimensions differ");
    const auto n = static_cast<Eigen::Index>(H.dimension());
    LanczosOptions lo;
    lo.tol = opts.tol;
    lo.n_eigen = n > 1 ? 2 : 1;
    lo.krylov_dim = opts.krylov_dim;
    lo.seed = opts.seed;
    lo.max_matvecs = opts.max_matvecs;
    auto res = lanczos_lowest([&H](const Eigen::VectorXd& x, Eigen::VectorXd& y) { H.apply(x, y); }, n, lo);

    GroundStateResult out;
    out.energy = res.values[0];
    out.first_excited = res.values.size() > 1 ? res.values[1] : std::numeric_limits<double>::infinity();
    out.residual = res.residuals[0];
    out.matvecs = res.matvecs;
    if (res.values.size() > 1) detail::check_gap(out.energy, out.first_excited, opts);
    Eigen::VectorXd v = std::move(res.vectors[0]);
    fix_sign(v);
    out.state = DenseState{std::move(basis), std::move(v)};
    return out;
}

/// Dense below the cap, Lanczos above it.
[[nodiscard]] inline GroundStateResult ground_state_auto(const SparseOperator& H, BasisPtr basis,
                                                         const GroundStateOptions& opts = {}) {
    return H.dimension() <= std::min<std::size_t>(opts.dense_cap, 1024) ? ground_state_dense(H, std::move(basis), opts)
                                                                         : ground_state_lanczos(H, std::move(basis), opts);
}

inline void write_checkpoint(std::ostream& os, const DenseState& s) {
    using namespace binary;
    const auto& g = s.geometry();
    write_magic(os, "RYDW");
    write_le<std::uint32_t>(os, 1);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.length));
    write_le<std::uint8_t>(os, g.periodic() ? 0 : 1);
    write_le<std::uint8_t>(os, g.hard() ? 0 : 1);
    write_le<std::uint16_t>(os, 0);
    write_le<std::uint64_t>(os, static_cast<std::uint64_t>(s.amplitudes.size()));
    for (Eigen::Index i = 0; i < s.amplitudes.size(); ++i) write_f64(os, s.amplitudes[i]);
}

[[nodiscard]] inline DenseState read_checkpoint(std::istream& is, const BasisOptions& bopts = {}) {
    using namespace binary;
    expect_magic(is, "RYDW");
    if (const auto version = read_le<std::uint32_t>(is); version != 1)
        throw ConfigError("unsupported wavefunction checkpoint version " + std::to_string(version));
    ChainGeometry g;
    g.length = static_cast<int>(read_le<std::uint32_t>(is));
    g.boundary = read_le<std::uint8_t>(is) == 0 ? Boundary::periodic : Boundary::open;
    g.mode = read_le<std::uint8_t>(is) == 0 ? ConstraintMode::hard_blockade : ConstraintMode::penalty;
    (void)read_le<std::uint16_t>(is);
    const auto dim = read_le<std::uint64_t>(is);
    auto basis = make_basis(g, bopts);
    if (dim != basis->dimension()) throw ConfigError("checkpoint dimension does not match its geometry");
    Eigen::VectorXd amps(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < amps.size(); ++i) amps[i] = read_f64(is);
    return DenseState{std::move(basis), std::move(amps)};
}

} // namespace rydcrit
