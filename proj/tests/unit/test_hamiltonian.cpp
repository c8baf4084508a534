// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file test_hamiltonian.cpp
 * @brief Sparse Hamiltonian entries, presets and MPO equivalence.
 */

#include <catch_amalgamated.hpp>

#include <rydcrit/dense_state.hpp>
#include <rydcrit/mpo.hpp>

#include <bit>
#include <random>

using namespace rydcrit;
using Catch::Matchers::WithinAbs;

namespace {

/// Full 2^L Hamiltonian from Kronecker products of single-site matrices.
Eigen::MatrixXd kron_hamiltonian(const HamiltonianParams& p, const ChainGeometry& g, bool include_v1) {
    const int L = g.length;
    const Eigen::Index D = Eigen::Index{1} << L;
    Eigen::Matrix2d X, N, I;
    X << 0, 1, 1, 0;
    N << 0, 0, 0, 1;
    I.setIdentity();
    // Site j acts on bit j of the row/column index, so site 0 is the innermost factor.
    auto embed = [&](const std::vector<std::pair<int, Eigen::Matrix2d>>& ops) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
        for (int j = 0; j < L; ++j) {
            Eigen::Matrix2d m = I;
            for (const auto& [s, o] : ops)
                if (s == j) m = o * m;
            Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) next.block(a * out.rows(), b * out.cols(), out.rows(), out.cols()) = m(a, b) * out;
            out = next;
        }
        return out;
    };
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);
    for (int j = 0; j < L; ++j) {
        double det = p.delta;
        if (p.edge_detuning_shift && !g.periodic() && (j == 0 || j == L - 1)) det = p.delta - p.v2;
        H += 0.5 * p.omega * embed({{j, X}}) - det * embed({{j, N}});
        for (int k : {1, 2}) {
            const double v = k == 1 ? (include_v1 ? p.v1 : 0.0) : p.v2;
            int partner = j + k;
            if (partner >= L) {
                if (!g.periodic()) continue;
                partner -= L;
            }
            if (partner != j) H += v * embed({{j, N}, {partner, N}});
        }
    }
    return H;
}

Eigen::MatrixXd restrict_to(const Eigen::MatrixXd& full, const BlockadedBasis& basis) {
    const auto n = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            out(r, c) = full(static_cast<Eigen::Index>(basis.config_of(static_cast<std::size_t>(r))),
                             static_cast<Eigen::Index>(basis.config_of(static_cast<std::size_t>(c))));
    return out;
}

HamiltonianParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    HamiltonianParams p;
    p.omega = 0.5 + std::abs(u(rng));
    p.delta = u(rng);
    p.v1 = 5.0 + 3.0 * std::abs(u(rng));
    p.v2 = u(rng);
    return p;
}

} // namespace

TEST_CASE("documented matrix entries", "[hamiltonian]") {
    {
        const ChainGeometry g{2, Boundary::open, ConstraintMode::hard_blockade};
        const auto basis = enumerate_basis(g, {});
        HamiltonianParams p;
        p.omega = 1.0;
        const auto H = build_hamiltonian(p, g, basis).to_dense();
        Eigen::Matrix3d ref;
        ref << 0, 0.5, 0.5, 0.5, 0, 0, 0.5, 0, 0;
        CHECK((H - ref).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        const ChainGeometry g{3, Boundary::periodic, ConstraintMode::hard_blockade};
        const auto basis = enumerate_basis(g, {});
        HamiltonianParams p;
        p.delta = 2.0;
        const auto H = build_hamiltonian(p, g, basis);
        const auto i = basis.index_of(config_from_string("010"));
        CHECK(H.diagonal(i) == -2.0);
    }
    {
        const ChainGeometry g{4, Boundary::periodic, ConstraintMode::hard_blockade};
        const auto basis = enumerate_basis(g, {});
        HamiltonianParams p;
        p.v2 = 3.0;
        const auto H = build_hamiltonian(p, g, basis);
        CHECK(H.diagonal(basis.index_of(config_from_string("0101"))) == 6.0);
    }
}

TEST_CASE("sparse build matches a Kronecker-product oracle", "[hamiltonian]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 6; ++trial) {
        const auto p = random_params(rng);
        for (int L : {5, 8}) {
            for (Boundary b : {Boundary::open, Boundary::periodic}) {
                for (ConstraintMode m : {ConstraintMode::hard_blockade, ConstraintMode::penalty}) {
                    auto q = p;
                    q.edge_detuning_shift = trial % 2 == 1;
                    const ChainGeometry g{L, b, m};
                    const auto basis = enumerate_basis(g, {});
                    const auto H = build_hamiltonian(q, g, basis);
                    const auto ref = restrict_to(kron_hamiltonian(q, g, !g.hard()), basis);
                    REQUIRE((H.to_dense() - ref).cwiseAbs().maxCoeff() < 1e-12);
                    REQUIRE(H.is_symmetric(0.0));
                }
            }
        }
    }
}

TEST_CASE("off-diagonal entries are single flips", "[hamiltonian]") {
    const ChainGeometry g{10, Boundary::periodic, ConstraintMode::hard_blockade};
    const auto basis = enumerate_basis(g, {});
    const auto H = build_hamiltonian(critical_preset(CriticalModel::tci, g.mode), g, basis).to_dense();
    for (Eigen::Index r = 0; r < H.rows(); ++r)
        for (Eigen::Index c = 0; c < H.cols(); ++c) {
            if (r == c || H(r, c) == 0.0) continue;
            const Config diff = basis.config_of(static_cast<std::size_t>(r)) ^ basis.config_of(static_cast<std::size_t>(c));
            REQUIRE(std::popcount(diff) == 1);
            REQUIRE(H(r, c) == 0.5);
        }
}

TEST_CASE("critical presets", "[hamiltonian]") {
    const auto ising = critical_preset(CriticalModel::ising);
    CHECK(ising.delta == 0.66445);
    CHECK(ising.v2 == 0.0);
    CHECK(ising.omega == 1.0);

    const auto tci = critical_preset(CriticalModel::tci);
    CHECK_THAT(tci.delta, WithinAbs(-1.5149537853923918, 1e-12));
    CHECK_THAT(tci.v2, WithinAbs(-1.6650953383927807, 1e-12));

    const ChainGeometry open{8, Boundary::open, ConstraintMode::hard_blockade};
    auto shifted = tci;
    shifted.edge_detuning_shift = true;
    CHECK(site_detuning(shifted, open, 0) == tci.delta - tci.v2);
    CHECK(site_detuning(shifted, open, 7) == tci.delta - tci.v2);
    CHECK(site_detuning(shifted, open, 3) == tci.delta);
    const ChainGeometry ring{8, Boundary::periodic, ConstraintMode::hard_blockade};
    CHECK(site_detuning(shifted, ring, 0) == tci.delta);
}

TEST_CASE("hard blockade is the large-V1 limit", "[hamiltonian]") {
    for (int L : {6, 8, 10}) {
        auto p = critical_preset(CriticalModel::ising);
        p.v1 = 100.0;
        const ChainGeometry hard{L, Boundary::open, ConstraintMode::hard_blockade};
        const ChainGeometry pen{L, Boundary::open, ConstraintMode::penalty};
        const auto bh = make_basis(hard);
        const auto bp = make_basis(pen);
        const double eh = ground_state_dense(build_hamiltonian(p, hard, *bh), bh).energy;
        const double ep = ground_state_dense(build_hamiltonian(p, pen, *bp), bp).energy;
        CHECK(std::abs(eh - ep) < 10.0 * p.omega * p.omega / p.v1);
    }
}

TEST_CASE("basis mismatch is rejected", "[hamiltonian]") {
    const auto basis = enumerate_basis({6, Boundary::open, ConstraintMode::hard_blockade}, {});
    CHECK_THROWS_AS(build_hamiltonian({}, {6, Boundary::periodic, ConstraintMode::hard_blockade}, basis), ConfigError);
    HamiltonianParams bad;
    bad.omega = 0.0;
    CHECK_THROWS_AS(build_hamiltonian(bad, {6, Boundary::open, ConstraintMode::hard_blockade}, basis), ConfigError);
}

TEST_CASE("MPO contraction equals the sparse operator", "[hamiltonian][mpo]") {
    std::mt19937_64 rng(5);
    const auto p = random_params(rng);
    for (int L : {6, 8}) {
        for (Boundary b : {Boundary::open, Boundary::periodic}) {
            for (ConstraintMode m : {ConstraintMode::penalty, ConstraintMode::hard_blockade}) {
                auto q = p;
                q.edge_detuning_shift = true;
                const ChainGeometry g{L, b, m};
                const auto basis = enumerate_basis(g, {});
                const auto H = build_hamiltonian(q, g, basis).to_dense();
                const auto D = mpo_to_dense(build_mpo(q, g));
                double err = 0.0;
                for (std::size_t r = 0; r < basis.dimension(); ++r)
                    for (std::size_t c = 0; c < basis.dimension(); ++c)
                        err = std::max(err, std::abs(H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -
                                                     D(static_cast<Eigen::Index>(basis.config_of(r)),
                                                       static_cast<Eigen::Index>(basis.config_of(c)))));
                INFO("L=" << L << " periodic=" << g.periodic() << " hard=" << g.hard());
                CHECK(err < 1e-12);
                if (!g.hard()) CHECK((D - kron_hamiltonian(q, g, true)).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
}
