// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file mpo.hpp
 * @brief Matrix-product operator for the Rydberg chain.
 *
 * The MPO is assembled from a list of operator strings. Every string owns one
 * channel on each bond it spans, plus the two shared channels "nothing placed
 * yet" (0) and "complete" (1). Periodic wrap-around terms simply span the
 * whole chain, so they need no special treatment beyond the extra channels.
 *
 * Penalty mode uses the plain local space with b + b^+ flips and the V1 term.
 * Hard-blockade mode dresses each flip with projectors onto empty neighbours
 * (P X P) and adds an internal nearest-neighbour penalty, so the blockaded
 * subspace is invariant and energetically preferred; restricted to that
 * subspace the MPO equals the constrained Hamiltonian exactly.
 */

#pragma once

#include <rydcrit/errors.hpp>
#include <rydcrit/hamiltonian.hpp>
#include <rydcrit/lattice_basis.hpp>

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <map>
#include <vector>

namespace rydcrit {

using LocalOp = Eigen::Matrix2d;

namespace ops {
inline LocalOp identity() { return LocalOp::Identity(); }
inline LocalOp number() { return (LocalOp() << 0, 0, 0, 1).finished(); }
inline LocalOp empty() { return (LocalOp() << 1, 0, 0, 0).finished(); }
inline LocalOp flip() { return (LocalOp() << 0, 1, 1, 0).finished(); }
} // namespace ops

/// One operator string: coefficient times a product of local operators on distinct sites.
struct OperatorString {
    double coefficient = 1.0;
    std::vector<std::pair<int, LocalOp>> factors;   ///< sites ascending after normalisation
};

/**
 * W[k](a, b) is a 2x2 local operator (row = bra state, column = ket state).
 * Site 0 has a single left channel and site L-1 a single right channel.
 */
class MatrixProductOperator {
public:
    struct Site {
        int left = 1;
        int right = 1;
        std::vector<LocalOp> blocks;   ///< left * right blocks, row-major in (a, b)

        [[nodiscard]] const LocalOp& at(int a, int b) const { return blocks[static_cast<std::size_t>(a * right + b)]; }
        [[nodiscard]] LocalOp& at(int a, int b) { return blocks[static_cast<std::size_t>(a * right + b)]; }
        [[nodiscard]] bool nonzero(int a, int b) const { return !at(a, b).isZero(0.0); }
    };

    MatrixProductOperator() = default;
    MatrixProductOperator(ChainGeometry g, std::vector<Site> sites) : geometry_(g), sites_(std::move(sites)) {}

    [[nodiscard]] const ChainGeometry& geometry() const noexcept { return geometry_; }
    [[nodiscard]] int length() const noexcept { return static_cast<int>(sites_.size()); }
    [[nodiscard]] const Site& site(int k) const { return sites_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] int max_bond() const noexcept {
        int m = 1;
        for (const auto& s : sites_) m = std::max(m, s.right);
        return m;
    }

private:
    ChainGeometry geometry_{};
    std::vector<Site> sites_;
};

/// Assemble an MPO from operator strings (see file comment for the channel layout).
[[nodiscard]] inline MatrixProductOperator assemble_mpo(const ChainGeometry& g, std::vector<OperatorString> terms) {
    const int L = g.length;
    // Canonicalise: sort factors, merge factors on one site, and sum identical strings
    // by keying on the site list (operators compared entrywise).
    for (auto& t : terms) {
        std::sort(t.factors.begin(), t.factors.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<int, LocalOp>> merged;
        for (auto& [site, op] : t.factors) {
            if (site < 0 || site >= L) throw ConfigError("operator string leaves the chain");
            if (!merged.empty() && merged.back().first == site) merged.back().second = merged.back().second * op;
            else merged.emplace_back(site, op);
        }
        t.factors = std::move(merged);
    }
    std::erase_if(terms, [](const auto& t) { return t.coefficient == 0.0 || t.factors.empty(); });

    // Channels crossing each cut k (between sites k and k+1).
    std::vector<std::vector<std::size_t>> crossing(static_cast<std::size_t>(std::max(L - 1, 0)));
    std::vector<std::map<std::size_t, int>> channel(static_cast<std::size_t>(std::max(L - 1, 0)));
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const int first = terms[t].factors.front().first;
        const int last = terms[t].factors.back().first;
        for (int k = first; k < last; ++k) {
            auto& list = crossing[static_cast<std::size_t>(k)];
            channel[static_cast<std::size_t>(k)][t] = 2 + static_cast<int>(list.size());
            list.push_back(t);
        }
    }

    std::vector<MatrixProductOperator::Site> sites(static_cast<std::size_t>(L));
    for (int k = 0; k < L; ++k) {
        auto& W = sites[static_cast<std::size_t>(k)];
        const int full_left = k == 0 ? 2 : 2 + static_cast<int>(crossing[static_cast<std::size_t>(k - 1)].size());
        const int full_right = k == L - 1 ? 2 : 2 + static_cast<int>(crossing[static_cast<std::size_t>(k)].size());
        W.left = full_left;
        W.right = full_right;
        W.blocks.assign(static_cast<std::size_t>(full_left * full_right), LocalOp::Zero());
        W.at(0, 0) = ops::identity();
        W.at(1, 1) = ops::identity();
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto& term = terms[t];
            const int first = term.factors.front().first;
            const int last = term.factors.back().first;
            if (k < first || k > last) continue;
            LocalOp op = ops::identity();
            for (const auto& [site, o] : term.factors)
                if (site == k) op = o;
            const int a = k == first ? 0 : channel[static_cast<std::size_t>(k - 1)].at(t);
            const int b = k == last ? 1 : channel[static_cast<std::size_t>(k)].at(t);
            W.at(a, b) += (k == first ? term.coefficient : 1.0) * op;
        }
    }
    // Trim the boundary channels: the chain starts in channel 0 and ends in channel 1.
    auto slice = [](const MatrixProductOperator::Site& W, std::vector<int> rows, std::vector<int> cols) {
        MatrixProductOperator::Site out;
        out.left = static_cast<int>(rows.size());
        out.right = static_cast<int>(cols.size());
        for (const int a : rows)
            for (const int b : cols) out.blocks.push_back(W.at(a, b));
        return out;
    };
    auto all = [](int n) {
        std::vector<int> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
        return v;
    };
    if (L == 1) {
        sites[0] = slice(sites[0], {0}, {1});
    } else {
        sites[0] = slice(sites[0], {0}, all(sites[0].right));
        auto& last = sites[static_cast<std::size_t>(L - 1)];
        last = slice(last, all(last.left), {1});
    }
    return MatrixProductOperator(g, std::move(sites));
}

/// Nearest-neighbour penalty used to keep hard-blockade DMRG inside the constrained space.
[[nodiscard]] inline double blockade_penalty(const HamiltonianParams& p) {
    return 10.0 * (p.omega + std::abs(p.delta) + std::abs(p.v2)) + 10.0;
}

/// Operator strings of the chain Hamiltonian, including wrap-around terms on rings.
[[nodiscard]] inline std::vector<OperatorString> hamiltonian_terms(const HamiltonianParams& params,
                                                                   const ChainGeometry& g) {
    params.validate();
    g.validate();
    const int L = g.length;
    const bool ring = g.periodic();
    std::vector<OperatorString> terms;
    auto partner = [&](int j, int k) -> int {
        const int s = j + k;
        if (s < L) return s;
        return ring ? s - L : -1;
    };
    for (int j = 0; j < L; ++j) {
        const double mu = site_detuning(params, g, j);
        if (mu != 0.0) terms.push_back({-mu, {{j, ops::number()}}});
        if (params.omega != 0.0) {
            if (g.hard()) {
                std::vector<std::pair<int, LocalOp>> f{{j, ops::flip()}};
                const int left = j > 0 ? j - 1 : (ring ? L - 1 : -1);
                const int right = partner(j, 1);
                if (left >= 0 && left != j) f.emplace_back(left, ops::empty());
                if (right >= 0 && right != j && right != left) f.emplace_back(right, ops::empty());
                terms.push_back({0.5 * params.omega, std::move(f)});
            } else {
                terms.push_back({0.5 * params.omega, {{j, ops::flip()}}});
            }
        }
        const int n1 = partner(j, 1);
        const double v1 = g.hard() ? blockade_penalty(params) : params.v1;
        if (n1 >= 0 && n1 != j && v1 != 0.0) terms.push_back({v1, {{j, ops::number()}, {n1, ops::number()}}});
        const int n2 = partner(j, 2);
        if (n2 >= 0 && n2 != j && params.v2 != 0.0)
            terms.push_back({params.v2, {{j, ops::number()}, {n2, ops::number()}}});
    }
    return terms;
}

[[nodiscard]] inline MatrixProductOperator build_mpo(const HamiltonianParams& params, const ChainGeometry& g) {
    return assemble_mpo(g, hamiltonian_terms(params, g));
}

/**
 * Full 2^L x 2^L matrix of the MPO; index bit j holds n_j. Small chains only.
 */
[[nodiscard]] inline Eigen::MatrixXd mpo_to_dense(const MatrixProductOperator& mpo) {
    const int L = mpo.length();
    if (L > 12) throw CapacityError("dense MPO contraction limited to L <= 12");
    // T[b] accumulates the operator on sites 0..k for right channel b.
    std::vector<Eigen::MatrixXd> T;
    const auto& W0 = mpo.site(0);
    for (int b = 0; b < W0.right; ++b) T.emplace_back(W0.at(0, b));
    for (int k = 1; k < L; ++k) {
        const auto& W = mpo.site(k);
        const Eigen::Index dim = T.front().rows();
        std::vector<Eigen::MatrixXd> next(static_cast<std::size_t>(W.right), Eigen::MatrixXd::Zero(2 * dim, 2 * dim));
        for (int a = 0; a < W.left; ++a) {
            for (int b = 0; b < W.right; ++b) {
                if (!W.nonzero(a, b)) continue;
                const LocalOp& o = W.at(a, b);
                auto& out = next[static_cast<std::size_t>(b)];
                // The new site is the most significant bit: kron(o, T[a]).
                for (int s = 0; s < 2; ++s)
                    for (int t = 0; t < 2; ++t)
                        if (o(s, t) != 0.0) out.block(s * dim, t * dim, dim, dim) += o(s, t) * T[static_cast<std::size_t>(a)];
            }
        }
        T = std::move(next);
    }
    return T.front();
}

} // namespace rydcrit
