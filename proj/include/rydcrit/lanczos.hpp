// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file lanczos.hpp
 * @brief Thick-restart Lanczos for the lowest eigenpairs of a symmetric operator.
 *
 * Every new Krylov vector is orthogonalised against the whole basis twice
 * (classical Gram-Schmidt, repeated), so the projected matrix is accumulated
 * column by column and no special bookkeeping is needed after a restart: the
 * kept Ritz vectors enter with a diagonal block and their couplings to the
 * residual direction show up in the next column.
 *
 * The operator is any callable `void(const Eigen::VectorXd& x, Eigen::VectorXd& y)`
 * computing y = A x.
 */

#pragma once

#include <rydcrit/errors.hpp>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace rydcrit {

struct LanczosOptions {
    double tol = 1e-10;        ///< absolute residual ||A v - e v|| per requested pair
    int n_eigen = 1;           ///< number of lowest eigenpairs to converge
    int krylov_dim = 48;       ///< basis size before a restart
    int keep = 12;             ///< Ritz vectors retained across a restart
    long max_matvecs = 20000;
    std::uint64_t seed = 0x5eed;
    bool throw_on_failure = true;
};

struct LanczosResult {
    std::vector<double> values;
    std::vector<Eigen::VectorXd> vectors;
    std::vector<double> residuals;
    long matvecs = 0;
    bool converged = false;
};

namespace detail {

/// Uniform in [-1, 1) with a portable bit-to-double mapping.
inline Eigen::VectorXd random_unit_vector(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = 2.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 - 1.0;
    v.normalize();
    return v;
}

/// Orthogonalise `w` against the first `cols` columns of `basis` (twice).
/// Returns the accumulated projection coefficients.
inline Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& basis, Eigen::Index cols, Eigen::VectorXd& w) {
    const auto Q = basis.leftCols(cols);
    Eigen::VectorXd h = Q.transpose() * w;
    w.noalias() -= Q * h;
    const Eigen::VectorXd h2 = Q.transpose() * w;
    w.noalias() -= Q * h2;
    h += h2;
    return h;
}

} // namespace detail

template <class Apply>
LanczosResult lanczos_lowest(Apply&& apply, Eigen::Index n, const LanczosOptions& opts,
                             const Eigen::VectorXd* start = nullptr) {
    if (n <= 0) throw ConfigError("lanczos: empty operator");
    const Eigen::Index n_eigen = std::min<Eigen::Index>(std::max(1, opts.n_eigen), n);
    const Eigen::Index cap = std::min<Eigen::Index>(std::max<Eigen::Index>(opts.krylov_dim, n_eigen + 2), n);
    const Eigen::Index keep = std::clamp<Eigen::Index>(opts.keep, n_eigen, std::max<Eigen::Index>(cap - 1, n_eigen));

    LanczosResult out;
    std::uint64_t reseed = opts.seed;

    Eigen::MatrixXd V(n, cap);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(cap, cap);
    Eigen::VectorXd w(n), residual(n);
    double residual_norm = 0.0;

    // Fresh direction orthogonal to the current basis (breakdown or restart from nothing).
    auto fresh_direction = [&](Eigen::Index cols) -> Eigen::VectorXd {
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::VectorXd r = detail::random_unit_vector(n, ++reseed * 0x9E3779B97F4A7C15ULL);
            if (cols > 0) detail::orthogonalize(V, cols, r);
            const double nr = r.norm();
            if (nr > 1e-8) return r / nr;
        }
        return Eigen::VectorXd::Zero(n);
    };

    if (start != nullptr && start->size() == n && start->norm() > 0.0) {
        V.col(0) = *start / start->norm();
    } else {
        V.col(0) = detail::random_unit_vector(n, opts.seed);
    }
    Eigen::Index nv = 1;
    Eigen::Index next_col = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    double scale = 0.0;

    while (true) {
        while (next_col < nv) {
            const Eigen::Index j = next_col;
            const Eigen::VectorXd vj = V.col(j);
            apply(vj, w);
            ++out.matvecs;
            const Eigen::VectorXd h = detail::orthogonalize(V, nv, w);
            G.col(j).head(nv) = h;
            scale = std::max(scale, h.cwiseAbs().maxCoeff());
            const double beta = w.norm();
            ++next_col;
            if (nv < cap) {
                if (beta > 1e-12 * std::max(scale, 1e-300)) {
                    V.col(nv) = w / beta;
                } else {
                    V.col(nv) = fresh_direction(nv);
                }
                ++nv;
            } else {
                residual = w;
                residual_norm = beta;
            }
        }

        // Rayleigh-Ritz on the symmetric projection (upper triangle is authoritative).
        Eigen::MatrixXd S = G.topLeftCorner(cap, cap).template triangularView<Eigen::Upper>();
        S.template triangularView<Eigen::StrictlyLower>() = S.transpose().template triangularView<Eigen::StrictlyLower>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
        const Eigen::VectorXd& theta = eig.eigenvalues();
        const Eigen::MatrixXd& Y = eig.eigenvectors();

        const bool full_space = cap == n;
        bool estimate_ok = true;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n_eigen; ++i) {
            const double r = full_space ? 0.0 : residual_norm * std::abs(Y(cap - 1, i));
            worst = std::max(worst, r);
            if (r > opts.tol) estimate_ok = false;
        }
        best_residual = std::min(best_residual, worst);

        if (estimate_ok) {
            // Confirm with true residuals before accepting.
            out.values.clear();
            out.vectors.clear();
            out.residuals.clear();
            bool all_ok = true;
            Eigen::VectorXd Ax(n);
            for (Eigen::Index i = 0; i < n_eigen; ++i) {
                Eigen::VectorXd x = V.leftCols(cap) * Y.col(i);
                x.normalize();
                apply(x, Ax);
                ++out.matvecs;
                const double rayleigh = x.dot(Ax);
                const double r = (Ax - rayleigh * x).norm();
                out.values.push_back(rayleigh);
                out.vectors.push_back(std::move(x));
                out.residuals.push_back(r);
                if (r > opts.tol) all_ok = false;
                best_residual = std::min(best_residual, r);
            }
            if (all_ok || full_space) {
                out.converged = all_ok;
                if (!all_ok && opts.throw_on_failure)
                    throw ConvergenceError("lanczos: residual above tolerance in full space", best_residual);
                return out;
            }
        }

        if (full_space || out.matvecs >= opts.max_matvecs) {
            if (opts.throw_on_failure)
                throw ConvergenceError("lanczos: no convergence after " + std::to_string(out.matvecs) +
                                           " matrix-vector products (best residual " +
                                           std::to_string(best_residual) + ")",
                                       best_residual);
            out.values.clear();
            out.vectors.clear();
            out.residuals.clear();
            Eigen::VectorXd Ax(n);
            for (Eigen::Index i = 0; i < n_eigen; ++i) {
                Eigen::VectorXd x = V.leftCols(cap) * Y.col(i);
                x.normalize();
                apply(x, Ax);
                ++out.matvecs;
                const double rayleigh = x.dot(Ax);
                out.values.push_back(rayleigh);
                out.residuals.push_back((Ax - rayleigh * x).norm());
                out.vectors.push_back(std::move(x));
            }
            out.converged = false;
            return out;
        }

        // Thick restart: keep the lowest Ritz vectors plus the residual direction.
        const Eigen::MatrixXd kept = V.leftCols(cap) * Y.leftCols(keep);
        V.leftCols(keep) = kept;
        G.setZero();
        for (Eigen::Index i = 0; i < keep; ++i) G(i, i) = theta[i];
        if (residual_norm > 1e-12 * std::max(scale, 1e-300)) {
            Eigen::VectorXd r = residual / residual_norm;
            detail::orthogonalize(V, keep, r);
            V.col(keep) = r / r.norm();
        } else {
            V.col(keep) = fresh_direction(keep);
        }
        nv = keep + 1;
        next_col = keep;
    }
}

} // namespace rydcrit
