// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file dmrg.hpp
 * @brief Two-site DMRG ground-state search.
 *
 * A sweep is one left-to-right and one right-to-left pass over all bonds.
 * Each bond update solves the effective two-site problem with Lanczos (or a
 * dense eigensolver for tiny blocks), splits the result by SVD and keeps at
 * most chi_max singular values above the relative cutoff. Convergence is
 * declared once the change of the energy and of every bond entropy between
 * successive sweeps falls below the configured tolerances.
 */

#pragma once

#include <rydcrit/errors.hpp>
#include <rydcrit/lanczos.hpp>
#include <rydcrit/mpo.hpp>
#include <rydcrit/mps.hpp>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace rydcrit {

struct DmrgConfig {
    int chi_max = 128;
    double entropy_tol = 1e-5;
    double energy_tol = 1e-7;
    int max_sweeps = 40;
    int min_sweeps = 2;
    double truncation_cutoff = 1e-10;
    int initial_chi = 16;          ///< bond dimension of the random starting state
    int krylov_dim = 24;           ///< local Lanczos basis size
    double local_tol = 1e-10;      ///< local Lanczos residual target
    long local_max_matvecs = 400;

    void validate() const {
        if (chi_max < 1) throw ConfigError("chi_max must be positive");
        if (max_sweeps < 1) throw ConfigError("max_sweeps must be positive");
        if (!(entropy_tol > 0.0) || !(energy_tol > 0.0)) throw ConfigError("DMRG tolerances must be positive");
        if (!(truncation_cutoff >= 0.0)) throw ConfigError("truncation cutoff must be >= 0");
    }
};

struct DmrgSweep {
    double energy = 0.0;
    double delta_energy = std::numeric_limits<double>::infinity();
    double delta_entropy = std::numeric_limits<double>::infinity();
    double max_truncation = 0.0;   ///< largest discarded weight in the sweep
    int max_bond = 1;
};

struct DmrgResult {
    MatrixProductState state;
    double energy = 0.0;
    bool converged = false;
    int sweeps = 0;
    double delta_energy = std::numeric_limits<double>::infinity();
    double delta_entropy = std::numeric_limits<double>::infinity();
    std::vector<DmrgSweep> history;
};

namespace detail {

/// Channel-indexed environment: one (bra x ket) matrix per MPO channel.
using Environment = std::vector<Eigen::MatrixXd>;

/// Left environment through site k: L'_b = sum W(a,b)_{st} A_s^T L_a A_t.
inline Environment extend_left(const Environment& L, const MatrixProductState::SiteTensor& A,
                               const MatrixProductOperator::Site& W) {
    const Eigen::Index r = A[0].cols();
    std::vector<std::array<Eigen::MatrixXd, 2>> Y(static_cast<std::size_t>(W.left));
    for (int a = 0; a < W.left; ++a) {
        if (L[static_cast<std::size_t>(a)].size() == 0) continue;
        for (int t = 0; t < 2; ++t) Y[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)] = L[static_cast<std::size_t>(a)] * A[static_cast<std::size_t>(t)];
    }
    Environment out(static_cast<std::size_t>(W.right));
    for (int b = 0; b < W.right; ++b) {
        std::array<Eigen::MatrixXd, 2> Z;
        bool any = false;
        for (int s = 0; s < 2; ++s) Z[static_cast<std::size_t>(s)] = Eigen::MatrixXd::Zero(A[0].rows(), r);
        for (int a = 0; a < W.left; ++a) {
            if (Y[static_cast<std::size_t>(a)][0].size() == 0 || !W.nonzero(a, b)) continue;
            const LocalOp& o = W.at(a, b);
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t)
                    if (o(s, t) != 0.0) {
                        Z[static_cast<std::size_t>(s)].noalias() += o(s, t) * Y[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)];
                        any = true;
                    }
        }
        if (!any) continue;
        out[static_cast<std::size_t>(b)] = A[0].transpose() * Z[0] + A[1].transpose() * Z[1];
    }
    return out;
}

/// Right environment through site k: R'_a = sum W(a,b)_{st} A_s R_b A_t^T.
inline Environment extend_right(const Environment& R, const MatrixProductState::SiteTensor& A,
                                const MatrixProductOperator::Site& W) {
    const Eigen::Index l = A[0].rows();
    std::vector<std::array<Eigen::MatrixXd, 2>> Y(static_cast<std::size_t>(W.right));
    for (int b = 0; b < W.right; ++b) {
        if (R[static_cast<std::size_t>(b)].size() == 0) continue;
        for (int t = 0; t < 2; ++t)
            Y[static_cast<std::size_t>(b)][static_cast<std::size_t>(t)] = R[static_cast<std::size_t>(b)] * A[static_cast<std::size_t>(t)].transpose();
    }
    Environment out(static_cast<std::size_t>(W.left));
    for (int a = 0; a < W.left; ++a) {
        std::array<Eigen::MatrixXd, 2> Z;
        bool any = false;
        for (int s = 0; s < 2; ++s) Z[static_cast<std::size_t>(s)] = Eigen::MatrixXd::Zero(A[0].cols(), l);
        for (int b = 0; b < W.right; ++b) {
            if (Y[static_cast<std::size_t>(b)][0].size() == 0 || !W.nonzero(a, b)) continue;
            const LocalOp& o = W.at(a, b);
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t)
                    if (o(s, t) != 0.0) {
                        Z[static_cast<std::size_t>(s)].noalias() += o(s, t) * Y[static_cast<std::size_t>(b)][static_cast<std::size_t>(t)];
                        any = true;
                    }
        }
        if (!any) continue;
        out[static_cast<std::size_t>(a)] = A[0] * Z[0] + A[1] * Z[1];
    }
    return out;
}

inline Environment trivial_environment() { return Environment{Eigen::MatrixXd::Ones(1, 1)}; }

/**
 * Effective two-site Hamiltonian acting on theta[s1][s2] (left x right blocks),
 * with theta stored as four consecutive column-major blocks.
 */
class TwoSiteOperator {
public:
    TwoSiteOperator(const Environment& L, const Environment& R, const MatrixProductOperator::Site& W1,
                    const MatrixProductOperator::Site& W2, Eigen::Index left, Eigen::Index right)
        : L_(L), R_(R), W1_(W1), W2_(W2), l_(left), r_(right) {}

    [[nodiscard]] Eigen::Index size() const noexcept { return 4 * l_ * r_; }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        const Eigen::Index blk = l_ * r_;
        auto in = [&](int s1, int s2) {
            return Eigen::Map<const Eigen::MatrixXd>(x.data() + (2 * s1 + s2) * blk, l_, r_);
        };
        const int wa = W1_.left, wb = W1_.right, wc = W2_.right;
        // X[a][s1 s2] = L_a theta[s1][s2]
        std::vector<std::array<Eigen::MatrixXd, 4>> X(static_cast<std::size_t>(wa));
        for (int a = 0; a < wa; ++a) {
            const auto& La = L_[static_cast<std::size_t>(a)];
            if (La.size() == 0) continue;
            for (int s = 0; s < 4; ++s) X[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] = La * in(s / 2, s % 2);
        }
        // Y[b][t1 s2] = sum_{a, s1} W1(a,b)_{t1 s1} X[a][s1 s2]
        std::vector<std::array<Eigen::MatrixXd, 4>> Y(static_cast<std::size_t>(wb));
        for (int b = 0; b < wb; ++b) {
            bool any = false;
            for (int a = 0; a < wa; ++a) {
                if (X[static_cast<std::size_t>(a)][0].size() == 0 || !W1_.nonzero(a, b)) continue;
                const LocalOp& o = W1_.at(a, b);
                for (int t1 = 0; t1 < 2; ++t1)
                    for (int s1 = 0; s1 < 2; ++s1) {
                        if (o(t1, s1) == 0.0) continue;
                        for (int s2 = 0; s2 < 2; ++s2) {
                            auto& dst = Y[static_cast<std::size_t>(b)][static_cast<std::size_t>(2 * t1 + s2)];
                            if (dst.size() == 0) dst = Eigen::MatrixXd::Zero(l_, r_);
                            dst.noalias() += o(t1, s1) * X[static_cast<std::size_t>(a)][static_cast<std::size_t>(2 * s1 + s2)];
                        }
                        any = true;
                    }
            }
            if (!any) Y[static_cast<std::size_t>(b)] = {};
        }
        // Z[c][t1 t2] = sum_{b, s2} W2(b,c)_{t2 s2} Y[b][t1 s2]; y[t1 t2] = sum_c Z[c][t1 t2] R_c^T
        y.setZero(size());
        for (int c = 0; c < wc; ++c) {
            const auto& Rc = R_[static_cast<std::size_t>(c)];
            if (Rc.size() == 0) continue;
            std::array<Eigen::MatrixXd, 4> Z;
            bool any = false;
            for (int b = 0; b < wb; ++b) {
                if (!W2_.nonzero(b, c)) continue;
                const LocalOp& o = W2_.at(b, c);
                for (int t2 = 0; t2 < 2; ++t2)
                    for (int s2 = 0; s2 < 2; ++s2) {
                        if (o(t2, s2) == 0.0) continue;
                        for (int t1 = 0; t1 < 2; ++t1) {
                            const auto& src = Y[static_cast<std::size_t>(b)][static_cast<std::size_t>(2 * t1 + s2)];
                            if (src.size() == 0) continue;
                            auto& dst = Z[static_cast<std::size_t>(2 * t1 + t2)];
                            if (dst.size() == 0) dst = Eigen::MatrixXd::Zero(l_, r_);
                            dst.noalias() += o(t2, s2) * src;
                            any = true;
                        }
                    }
            }
            if (!any) continue;
            for (int t = 0; t < 4; ++t) {
                if (Z[static_cast<std::size_t>(t)].size() == 0) continue;
                Eigen::Map<Eigen::MatrixXd> out(y.data() + t * blk, l_, r_);
                out.noalias() += Z[static_cast<std::size_t>(t)] * Rc.transpose();
            }
        }
    }

private:
    const Environment& L_;
    const Environment& R_;
    const MatrixProductOperator::Site& W1_;
    const MatrixProductOperator::Site& W2_;
    Eigen::Index l_, r_;
};

struct LocalSolution {
    double energy = 0.0;
    Eigen::VectorXd vector;
};

inline LocalSolution solve_two_site(const TwoSiteOperator& op, const Eigen::VectorXd& start, const DmrgConfig& cfg,
                                    std::uint64_t seed) {
    const Eigen::Index n = op.size();
    if (n <= 96) {
        Eigen::MatrixXd H(n, n);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            e.setZero();
            e[i] = 1.0;
            op.apply(e, col);
            H.col(i) = col;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (H + H.transpose()));
        return {eig.eigenvalues()[0], eig.eigenvectors().col(0)};
    }
    LanczosOptions lo;
    lo.tol = cfg.local_tol;
    lo.krylov_dim = cfg.krylov_dim;
    lo.keep = 4;
    lo.max_matvecs = cfg.local_max_matvecs;
    lo.seed = seed;
    lo.throw_on_failure = false;
    auto res = lanczos_lowest([&op](const Eigen::VectorXd& x, Eigen::VectorXd& y) { op.apply(x, y); }, n, lo, &start);
    return {res.values[0], std::move(res.vectors[0])};
}

struct Split {
    double truncation = 0.0;
    double entropy = 0.0;
};

/**
 * Split theta into two site tensors. With `move_right` the left tensor is
 * left-normalised and the singular values go to the right, otherwise the
 * reverse.
 */
inline Split split_two_site(const Eigen::VectorXd& theta, Eigen::Index l, Eigen::Index r, const DmrgConfig& cfg,
                            bool move_right, MatrixProductState::SiteTensor& A, MatrixProductState::SiteTensor& B) {
    const Eigen::Index blk = l * r;
    Eigen::MatrixXd M(2 * l, 2 * r);
    for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2)
            M.block(s1 * l, s2 * r, l, r) = Eigen::Map<const Eigen::MatrixXd>(theta.data() + (2 * s1 + s2) * blk, l, r);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double total = s.squaredNorm();
    Eigen::Index keep = 0;
    double kept = 0.0;
    while (keep < s.size() && keep < cfg.chi_max && s[keep] * s[keep] > cfg.truncation_cutoff * total) {
        kept += s[keep] * s[keep];
        ++keep;
    }
    keep = std::max<Eigen::Index>(keep, 1);
    if (keep == 1) kept = s[0] * s[0];
    Split out;
    out.truncation = total > 0.0 ? std::max(0.0, 1.0 - kept / total) : 0.0;
    const Eigen::VectorXd sk = s.head(keep) / std::sqrt(kept);
    for (Eigen::Index i = 0; i < keep; ++i) {
        const double p = sk[i] * sk[i];
        if (p > 1e-300) out.entropy -= p * std::log(p);
    }
    Eigen::MatrixXd U = svd.matrixU().leftCols(keep);
    Eigen::MatrixXd Vt = svd.matrixV().leftCols(keep).transpose();
    if (move_right) Vt = sk.asDiagonal() * Vt;
    else U = U * sk.asDiagonal();
    A[0] = U.topRows(l);
    A[1] = U.bottomRows(l);
    B[0] = Vt.leftCols(r);
    B[1] = Vt.rightCols(r);
    return out;
}

inline Eigen::VectorXd pack_two_site(const MatrixProductState::SiteTensor& A, const MatrixProductState::SiteTensor& B) {
    const Eigen::Index l = A[0].rows(), r = B[0].cols();
    Eigen::VectorXd theta(4 * l * r);
    for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2)
            Eigen::Map<Eigen::MatrixXd>(theta.data() + (2 * s1 + s2) * l * r, l, r) =
                A[static_cast<std::size_t>(s1)] * B[static_cast<std::size_t>(s2)];
    return theta;
}

} // namespace detail

/// <psi|H|psi> / <psi|psi>.
[[nodiscard]] inline double mpo_expectation(const MatrixProductState& psi, const MatrixProductOperator& mpo) {
    if (psi.length() != mpo.length()) throw ConfigError("MPS and MPO lengths differ");
    auto E = detail::trivial_environment();
    for (int k = 0; k < psi.length(); ++k) E = detail::extend_left(E, psi.site(k), mpo.site(k));
    return E[0](0, 0) / norm_squared(psi);
}

/**
 * Two-site DMRG from a seeded random state (or `initial` when given).
 * Hitting max_sweeps is not an error; the result then has converged = false.
 */
[[nodiscard]] inline DmrgResult dmrg_ground_state(const MatrixProductOperator& mpo, const DmrgConfig& cfg,
                                                  std::uint64_t seed, const MatrixProductState* initial = nullptr) {
    cfg.validate();
    const int L = mpo.length();
    if (L < 2) throw ConfigError("DMRG needs at least two sites");
    DmrgResult result;
    result.state = initial != nullptr ? *initial : random_mps(mpo.geometry(), std::min(cfg.initial_chi, cfg.chi_max), seed);
    auto& psi = result.state;
    if (psi.length() != L) throw ConfigError("initial MPS length differs from the MPO");
    canonicalize(psi, 0);

    std::vector<detail::Environment> left(static_cast<std::size_t>(L)), right(static_cast<std::size_t>(L));
    left[0] = detail::trivial_environment();
    right[static_cast<std::size_t>(L - 1)] = detail::trivial_environment();
    for (int k = L - 1; k > 0; --k)
        right[static_cast<std::size_t>(k - 1)] = detail::extend_right(right[static_cast<std::size_t>(k)], psi.site(k), mpo.site(k));

    std::vector<double> entropy(static_cast<std::size_t>(L - 1), 0.0), previous_entropy;
    double previous_energy = std::numeric_limits<double>::infinity();
    std::uint64_t local_seed = seed ^ 0xD1B54A32D192ED03ULL;

    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        DmrgSweep info;
        double energy = 0.0;
        auto update = [&](int k, bool move_right) {
            auto& A = psi.site(k);
            auto& B = psi.site(k + 1);
            const Eigen::Index l = A[0].rows(), r = B[0].cols();
            const detail::TwoSiteOperator op(left[static_cast<std::size_t>(k)], right[static_cast<std::size_t>(k + 1)],
                                             mpo.site(k), mpo.site(k + 1), l, r);
            const auto sol = detail::solve_two_site(op, detail::pack_two_site(A, B), cfg, ++local_seed);
            energy = sol.energy;
            const auto split = detail::split_two_site(sol.vector, l, r, cfg, move_right, A, B);
            info.max_truncation = std::max(info.max_truncation, split.truncation);
            entropy[static_cast<std::size_t>(k)] = split.entropy;
            if (move_right)
                left[static_cast<std::size_t>(k + 1)] = detail::extend_left(left[static_cast<std::size_t>(k)], A, mpo.site(k));
            else
                right[static_cast<std::size_t>(k)] = detail::extend_right(right[static_cast<std::size_t>(k + 1)], B, mpo.site(k + 1));
        };
        for (int k = 0; k + 1 < L; ++k) update(k, true);
        for (int k = L - 2; k >= 0; --k) update(k, false);
        psi.set_center(0);

        info.energy = energy;
        info.max_bond = psi.max_bond();
        info.delta_energy = std::abs(energy - previous_energy);
        if (!previous_entropy.empty()) {
            info.delta_entropy = 0.0;
            for (std::size_t b = 0; b < entropy.size(); ++b)
                info.delta_entropy = std::max(info.delta_entropy, std::abs(entropy[b] - previous_entropy[b]));
        }
        result.history.push_back(info);
        previous_energy = energy;
        previous_entropy = entropy;
        result.sweeps = sweep;
        result.energy = energy;
        result.delta_energy = info.delta_energy;
        result.delta_entropy = info.delta_entropy;
        if (sweep >= cfg.min_sweeps && info.delta_energy < cfg.energy_tol && info.delta_entropy < cfg.entropy_tol) {
            result.converged = true;
            break;
        }
    }
    fix_mps_sign(psi);
    return result;
}

} // namespace rydcrit
