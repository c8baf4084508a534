// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file test_observables.cpp
 * @brief Bond operators, measurement-adapted operators, correlators and entropy.
 */

#include <catch_amalgamated.hpp>

#include <rydcrit/rydcrit.hpp>

#include <sstream>

using namespace rydcrit;
using Catch::Matchers::WithinAbs;

namespace {

DenseState critical_state(CriticalModel m, const ChainGeometry& g) {
    auto basis = make_basis(g);
    return ground_state_auto(build_hamiltonian(critical_preset(m, g.mode), g, *basis), basis).state;
}

std::vector<std::pair<int, double>> terms_of(const DiagonalObservable& o) { return o.terms; }

} // namespace

TEST_CASE("bond operators on product states", "[observables]") {
    const ChainGeometry g{4, Boundary::periodic, ConstraintMode::hard_blockade};
    auto basis = make_basis(g);
    const auto s = product_state(basis, config_from_string("0101"));
    CHECK(sigma_bond(s, 0) == -0.5);
    CHECK(sigma_bond(s, 1) == -0.5);
    CHECK(epsilon_bond(s, 0) == 0.5);
    const auto vac = product_state(basis, 0);
    CHECK(epsilon_bond(vac, 2) == 0.0);
    CHECK(expectation(vac, sigma_bond_observable(g, 3)) == 0.0);
    CHECK(sigma_bond_observable(g, 3).terms == std::vector<std::pair<int, double>>{{0, 0.5}, {3, -0.5}});

    const ChainGeometry open{5, Boundary::open, ConstraintMode::hard_blockade};
    CHECK(sigma_bonds(open).size() == 4);
    CHECK_THROWS_AS(sigma_bond_observable(open, 4), ConfigError);
    CHECK_THROWS_AS(sigma_bond_observable({5, Boundary::periodic, ConstraintMode::hard_blockade}, 0), ConfigError);
}

TEST_CASE("sigma^n operators follow the unmeasured sites", "[observables]") {
    const ChainGeometry g{20, Boundary::periodic, ConstraintMode::hard_blockade};
    {
        const auto sec = expand_pattern("n[5j]=0", g);
        const auto ops = build_sigma_n(sec);
        REQUIRE(ops.size() == 4);
        CHECK(terms_of(ops[0]) == std::vector<std::pair<int, double>>{{1, -0.25}, {2, 0.25}, {3, -0.25}, {4, 0.25}});
        CHECK(ops[1].center.value() == 7.5);
        const auto eps = build_epsilon_n(sec);
        CHECK(terms_of(eps[0]) == std::vector<std::pair<int, double>>{{1, 0.25}, {2, 0.25}, {3, 0.25}, {4, 0.25}});
    }
    {
        const auto sec = expand_pattern("n[2j]=0", g);
        const auto ops = build_sigma_n(sec);
        REQUIRE(ops.size() == 10);
        CHECK(terms_of(ops[3]) == std::vector<std::pair<int, double>>{{7, -1.0}});
        CHECK_THROWS_AS(build_epsilon_n(sec), ConfigError);
    }
    {
        const ChainGeometry g18{18, Boundary::periodic, ConstraintMode::hard_blockade};
        const auto sec = expand_pattern("n[3j]=0", g18);
        CHECK(terms_of(build_epsilon_n(sec)[0]) == std::vector<std::pair<int, double>>{{1, 0.5}, {2, 0.5}});
        const auto two = expand_pattern("n[3j]=0,n[3j+1]=0", g18);
        CHECK(cell_layout(two).extended);
        const auto ops = build_sigma_n(two);
        REQUIRE(ops.size() == 6);
        CHECK(terms_of(ops[0]) == std::vector<std::pair<int, double>>{{2, 0.5}, {5, -0.5}});
        CHECK(ops[0].center.value() == 3.5);
        // The last operator wraps around the ring.
        CHECK(terms_of(ops[5]) == std::vector<std::pair<int, double>>{{2, 0.5}, {17, -0.5}});
    }
    CHECK_THROWS_AS(build_sigma_n(expand_pattern("n[1j]=0", g)), ConfigError);
}

TEST_CASE("extended operators cancel the smooth part", "[observables]") {
    const ChainGeometry g{18, Boundary::periodic, ConstraintMode::hard_blockade};
    const auto s = critical_state(CriticalModel::ising, g);
    const auto sec = expand_pattern("n[3j]=0,n[3j+1]=0", g);
    const auto post = project(s, sec).state;
    const auto mean = occupations(post);
    for (const auto& o : build_sigma_n(sec)) CHECK(std::abs(expectation(mean, o)) < 1e-6);
}

TEST_CASE("Z2 epsilon operator", "[observables]") {
    const ChainGeometry g{12, Boundary::periodic, ConstraintMode::hard_blockade};
    const auto sec = expand_pattern("n[3j]=0,n[3j+1]=0", g);
    const auto z2 = build_epsilon_z2(sec);
    REQUIRE(z2.size() == 4);
    CHECK(terms_of(z2[1]) == std::vector<std::pair<int, double>>{{2, 0.25}, {5, 0.5}, {8, 0.25}});
    CHECK(terms_of(z2[0]) == std::vector<std::pair<int, double>>{{2, 0.5}, {5, 0.25}, {11, 0.25}});

    // Average of the two neighbouring epsilon^n operators.
    const auto eps = build_epsilon_n(sec);
    const auto s = critical_state(CriticalModel::tci, g);
    const auto mean = occupations(project(s, sec).state);
    for (std::size_t k = 0; k < z2.size(); ++k) {
        const double e_left = expectation(mean, eps[(k + eps.size() - 1) % eps.size()]);
        const double e_right = expectation(mean, eps[k]);
        CHECK_THAT(expectation(mean, z2[k]), WithinAbs(0.5 * (e_left + e_right), 1e-12));
    }
    auto basis = make_basis(g);
    CHECK(expectation(product_state(basis, 0), z2[2]) == 0.0);
    CHECK_THROWS_AS(build_epsilon_z2(expand_pattern("n[3j]=0", g)), ConfigError);
}

TEST_CASE("connected correlators", "[observables]") {
    const ChainGeometry g{12, Boundary::periodic, ConstraintMode::hard_blockade};
    auto basis = make_basis(g);
    const auto prod = product_state(basis, config_from_string("010010010010"));
    const auto bonds = sigma_bonds(g);
    const auto flat = connected_correlator(prod, bonds, translation_pairs(bonds.size(), true));
    for (const auto& p : flat.points) CHECK(std::abs(p.value) <= 1e-14);

    // Oracle: covariance from explicit sums over the basis.
    const auto s = critical_state(CriticalModel::ising, g);
    const auto series = connected_correlator(s, bonds, translation_pairs(bonds.size(), true));
    REQUIRE(series.size() == 5);
    for (const auto& p : series.points) {
        const int m = static_cast<int>(std::lround(p.separation));
        double ab = 0.0, a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < s.dimension(); ++i) {
            const double w = s.amplitudes[static_cast<Eigen::Index>(i)] * s.amplitudes[static_cast<Eigen::Index>(i)];
            const Config c = basis->config_of(i);
            const double va = bonds[0].evaluate(c);
            const double vb = bonds[static_cast<std::size_t>(m)].evaluate(c);
            ab += w * va * vb;
            a += w * va;
            b += w * vb;
        }
        CHECK_THAT(p.value, WithinAbs(ab - a * b, 1e-12));
    }
    // Overlapping supports are dropped.
    const auto eps = epsilon_bonds(g);
    const auto near = connected_correlator(s, eps, {{0, 1}, {0, 2}});
    REQUIRE(near.size() == 1);
    CHECK(near.points[0].separation == 2.0);
}

TEST_CASE("open-chain profiles", "[observables]") {
    const ChainGeometry g{12, Boundary::open, ConstraintMode::hard_blockade};
    const auto s = critical_state(CriticalModel::ising, g);
    const auto prof = one_point_profile(s, sigma_bonds(g));
    REQUIRE(prof.size() == 11);
    CHECK(prof.points.front().separation == 0.5);
    CHECK(prof.meta.kind == "profile");
    // Reflection about the chain centre maps bond j to L - 2 - j and flips the stagger sign when L is even.
    for (std::size_t k = 0; k < prof.size(); ++k)
        CHECK_THAT(prof.points[k].value, WithinAbs(-prof.points[prof.size() - 1 - k].value, 1e-10));
    const ChainGeometry ring{12, Boundary::periodic, ConstraintMode::hard_blockade};
    CHECK_THROWS_AS(one_point_profile(critical_state(CriticalModel::ising, ring), sigma_bonds(ring)), ConfigError);
}

TEST_CASE("entanglement entropy", "[observables]") {
    const ChainGeometry g{2, Boundary::open, ConstraintMode::hard_blockade};
    auto basis = make_basis(g);
    DenseState bell{basis, Eigen::Vector3d(0.0, 1.0, 1.0) / std::sqrt(2.0)};
    CHECK_THAT(half_chain_entropy(bell, 1), WithinAbs(std::log(2.0), 1e-14));
    CHECK(half_chain_entropy(product_state(basis, 0), 1) == 0.0);

    const ChainGeometry g8{8, Boundary::periodic, ConstraintMode::hard_blockade};
    const auto s = critical_state(CriticalModel::tci, g8);
    CHECK_THAT(half_chain_entropy(s, 3), WithinAbs(half_chain_entropy(dense_to_mps(s), 3), 1e-10));
    CHECK_THROWS_AS(half_chain_entropy(s, 9), ConfigError);
}

TEST_CASE("series serialise to CSV and JSON", "[observables]") {
    CorrelatorSeries s;
    s.meta = SeriesMeta{"sigma", 24, Boundary::periodic, "n[2j]=0", "connected", "chord"};
    s.points = {{1.0, 0.25, std::nullopt}, {2.5, -1e-3, 2e-4}};
    std::stringstream csv;
    write_csv(csv, s);
    const auto back = read_csv_points(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[1].value == -1e-3);
    CHECK(back[1].error == std::optional<double>{2e-4});
    CHECK_FALSE(back[0].error.has_value());
    const auto meta = series_meta_from_json(to_json(s.meta));
    CHECK(meta.sector == "n[2j]=0");
    CHECK(meta.distance == "chord");
    CHECK(meta.length == 24);
}
