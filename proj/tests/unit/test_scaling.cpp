// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file test_scaling.cpp
 * @brief Distances, exponent fits, crossings and probability decay on synthetic data.
 */

#include <catch_amalgamated.hpp>

#include <rydcrit/rydcrit.hpp>

#include <numbers>

using namespace rydcrit;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

CorrelatorSeries make_series(Boundary b, int L, const std::vector<std::pair<double, double>>& pts,
                             std::string kind = "connected") {
    CorrelatorSeries s;
    s.meta = SeriesMeta{"synthetic", L, b, "", std::move(kind), "raw"};
    for (const auto& [d, v] : pts) s.points.push_back({d, v, std::nullopt});
    return s;
}

/// Open-chain profile sampled at bond centres j + 1/2.
CorrelatorSeries open_profile(int L, double (*f)(double)) {
    std::vector<std::pair<double, double>> pts;
    for (int j = 0; j + 1 < L; ++j) {
        const double pos = j + 0.5;
        pts.emplace_back(pos, f(boundary_coordinate(pos, L)));
    }
    return make_series(Boundary::open, L, pts, "profile");
}

} // namespace

TEST_CASE("chord distance", "[scaling]") {
    CHECK_THAT(chord_distance(0, 12, 24), WithinAbs(24 / kPi, 1e-14));
    CHECK_THAT(chord_distance(3, 4, 1000), WithinAbs(1.0, 1e-5));
    CHECK_THAT(chord_distance(0, 5, 24), WithinAbs(chord_distance(0, 19, 24), 1e-14));
    CHECK_THAT(chord_distance(2, 7, 24), WithinAbs(chord_distance(0, 5, 24), 1e-14));

    auto s = make_series(Boundary::periodic, 24, {{6, 1.0}});
    s = to_chord(s);
    CHECK_THAT(s.points[0].separation, WithinAbs(24 / kPi * std::sin(kPi / 4), 1e-14));
    CHECK(s.meta.distance == "chord");
    CHECK_THROWS_AS(to_chord(make_series(Boundary::open, 24, {{6, 1.0}})), ConfigError);
}

TEST_CASE("window rounding", "[scaling]") {
    CHECK(window_count(10, 0.8) == 8);
    CHECK(window_count(11, 0.8) == 9);
    CHECK(window_count(5, 1.0) == 5);
    CHECK_THROWS_AS(window_count(5, 0.0), ConfigError);
    CHECK_THROWS_AS(window_count(5, 1.5), ConfigError);
}

TEST_CASE("power-law fit on exact data", "[scaling]") {
    std::vector<std::pair<double, double>> pts;
    for (int d = 1; d <= 12; ++d) pts.emplace_back(d, std::pow(d, -0.25));
    const auto f = fit_power_law(make_series(Boundary::periodic, 24, pts));
    CHECK_THAT(f.exponent, WithinAbs(0.125, 1e-12));
    CHECK(f.n_points == 10);
    CHECK_FALSE(f.sign_flipped);

    // Negative correlators fit by magnitude; only the window is used.
    std::vector<std::pair<double, double>> neg;
    for (int d = 1; d <= 10; ++d) neg.emplace_back(d, d <= 2 ? 5.0 : -3.0 * std::pow(d, -4.0));
    const auto g = fit_power_law(make_series(Boundary::periodic, 20, neg), 0.8);
    CHECK_THAT(g.exponent, WithinAbs(2.0, 1e-12));
    CHECK(g.sign_flipped);

    std::vector<std::pair<double, double>> mixed;
    for (int d = 1; d <= 10; ++d) mixed.emplace_back(d, (d % 2 ? 1.0 : -1.0) * std::pow(d, -2.0));
    CHECK_THROWS_AS(fit_power_law(make_series(Boundary::periodic, 20, mixed)), FitError);
    CHECK_THROWS_AS(fit_power_law(make_series(Boundary::periodic, 20, {{1, 1.0}, {2, 0.5}, {3, 0.3}})), FitError);
}

TEST_CASE("sine fit on exact profiles", "[scaling]") {
    const auto prof = open_profile(61, [](double x) { return std::pow(std::sin(x), -0.125); });
    const auto f = fit_obc_sine(prof, 61);
    CHECK_THAT(f.exponent, WithinAbs(0.125, 1e-12));
    const auto narrow = fit_obc_sine(prof, 61, 0.3);
    CHECK_THAT(narrow.exponent, WithinAbs(0.125, 1e-12));
    CHECK(narrow.n_points == 18);
    CHECK_THROWS_AS(fit_obc_sine(open_profile(21, [](double x) { return -std::sin(x); }), 21), FitError);
}

TEST_CASE("derivative fit removes a bulk offset", "[scaling]") {
    SECTION("power law in x") {
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 60; ++i) {
            const double x = 0.02 + 1.5 * i / 59.0;
            // Invert boundary_coordinate for a 121-site chain.
            const double pos = x * 123.0 / kPi - 0.5;
            pts.emplace_back(pos, 0.3 + std::pow(x, -2.0));
        }
        const auto f = fit_obc_derivative(make_series(Boundary::open, 121, pts, "profile"), 121);
        CHECK_THAT(f.exponent, WithinAbs(2.0, 0.01));
    }
    SECTION("power law in sin x") {
        const auto prof = open_profile(121, [](double x) { return 0.3 + 0.05 * std::pow(std::sin(x), -2.0); });
        const auto f = fit_obc_derivative(prof, 121, 0.8, 4, DerivativeAxis::sine);
        CHECK_THAT(f.exponent, WithinAbs(2.0, 0.01));
        // The x abscissa is biased by the cos x factor near the centre.
        const auto biased = fit_obc_derivative(prof, 121, 0.8, 4, DerivativeAxis::x);
        CHECK(biased.exponent > f.exponent);
    }
    CHECK_THROWS_AS(fit_obc_derivative(open_profile(5, [](double x) { return x; }), 5), FitError);
}

TEST_CASE("two-cell averaging", "[scaling]") {
    auto flat = make_series(Boundary::periodic, 24, {{1, 2.0}, {2, 2.0}, {3, 2.0}, {4, 2.0}});
    for (const auto& p : two_cell_average(flat).points) CHECK(p.value == 2.0);
    std::vector<std::pair<double, double>> osc;
    for (int l = 0; l < 10; ++l) osc.emplace_back(l, 1.5 + (l % 2 ? -0.7 : 0.7));
    const auto avg = two_cell_average(make_series(Boundary::periodic, 24, osc));
    REQUIRE(avg.size() == 5);
    for (const auto& p : avg.points) CHECK_THAT(p.value, WithinAbs(1.5, 1e-15));
    CHECK(avg.points[1].separation == 2.5);
}

TEST_CASE("probability decay", "[scaling]") {
    std::vector<std::pair<int, double>> data;
    for (int L = 8; L <= 28; L += 4) data.emplace_back(L, std::exp(-L / 50.0));
    const auto f = fit_probability_decay(data, 0.5);
    CHECK_THAT(f.decay(), WithinAbs(0.02, 1e-14));
    CHECK_THAT(f.xi(), WithinAbs(25.0, 1e-10));
    CHECK_THAT(f.extrapolate(100), WithinAbs(std::exp(-2.0), 1e-12));
    CHECK_THROWS_AS(fit_probability_decay({{8, 0.5}, {10, 0.4}, {12, 0.3}}, 0.5), FitError);
    CHECK_THROWS_AS(fit_probability_decay({{8, 0.5}, {10, 0.4}, {12, 0.3}, {14, 0.0}}, 0.5), FitError);
}

TEST_CASE("curve crossings", "[scaling]") {
    CurveFamily f;
    for (int i = 0; i <= 20; ++i) f.grid.push_back(0.5 + 0.01 * i);
    f.sizes = {8, 12};
    f.values.resize(2);
    for (const double d : f.grid) {
        f.values[0].push_back(d - 0.6);
        f.values[1].push_back(2.0 * (d - 0.6));
    }
    const auto r = find_curve_crossing(f);
    CHECK_THAT(r.value, WithinAbs(0.6, 1e-12));
    CHECK(r.spread == 0.0);

    f.sizes.push_back(16);
    f.values.push_back(std::vector<double>(f.grid.size(), 5.0));
    CHECK_THROWS_AS(find_curve_crossing(f), FitError);
}

TEST_CASE("detuning scan limits", "[scaling]") {
    const auto base = critical_preset(CriticalModel::ising, ConstraintMode::hard_blockade);
    const auto fam = scan_detuning({7, 9, 11}, {-3.0, 3.0}, base);
    REQUIRE(fam.values.size() == 3);
    // Disordered side: the rescaled mid-chain order parameter shrinks with L; ordered side: it grows.
    auto y = [&](std::size_t size, std::size_t point) { return std::abs(fam.values[size][point]); };
    CHECK(y(0, 0) > y(1, 0));
    CHECK(y(1, 0) > y(2, 0));
    CHECK(y(0, 1) < y(1, 1));
    CHECK(y(1, 1) < y(2, 1));
    CHECK_THROWS_AS(scan_detuning({8}, {0.5}, base), ConfigError);
}

TEST_CASE("theta sweep limits", "[scaling]") {
    const ChainGeometry g{8, Boundary::periodic, ConstraintMode::hard_blockade};
    auto basis = make_basis(g);
    const auto gs = ground_state_auto(build_hamiltonian(critical_preset(CriticalModel::ising, g.mode), g, *basis), basis);
    const auto fam = sweep_theta({gs.state}, 40.0, {0.0, kPi / 2});
    CHECK_THAT(fam.values[0][0], WithinAbs(0.0, 1e-10));
    CHECK_THAT(std::abs(fam.values[0][1]), WithinAbs(0.5, 1e-3));
}
