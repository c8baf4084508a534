// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file acceptance.cpp
 * @brief Acceptance suite: one PASS/FAIL line per criterion.
 *
 * Tier 1 runs exact diagonalisation only. Tier 2 (DMRG) is split: the
 * DMRG-versus-ED check always runs, the long-chain L = 121 study only when
 * RYDCRIT_TIER2=1. Pass --strict to turn any failed criterion into a nonzero
 * exit status.
 */

#include <rydcrit/rydcrit.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

using namespace rydcrit;

namespace {

constexpr double kPi = std::numbers::pi;

enum class Status { pass, fail, skip, not_applicable };

struct Outcome {
    Status status = Status::fail;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    bool tier1;
    std::function<Outcome()> run;
};

/// Streams doubles with a fixed number of significant digits.
class Detail {
public:
    template <class T>
    Detail& operator<<(const T& v) {
        os_ << v;
        return *this;
    }
    Detail& num(double v, int digits = 5) {
        os_ << std::setprecision(digits) << v;
        return *this;
    }
    [[nodiscard]] std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

Outcome verdict(bool ok, const Detail& d) { return {ok ? Status::pass : Status::fail, d.str()}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Cached ground states (hard blockade, critical presets)

class States {
public:
    const DenseState& get(CriticalModel m, int L, Boundary b) {
        const auto key = std::make_tuple(static_cast<int>(m), L, static_cast<int>(b));
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            const ChainGeometry g{L, b, ConstraintMode::hard_blockade};
            it = cache_.emplace(key, detail::solve_ground_state(critical_preset(m, g.mode), g, {})).first;
        }
        return it->second;
    }
    const DenseState& ring(CriticalModel m, int L) { return get(m, L, Boundary::periodic); }

private:
    std::map<std::tuple<int, int, int>, DenseState> cache_;
};

States& states() {
    static States s;
    return s;
}

/// Exponent of a connected correlator on a ring at chord distance.
FitResult ring_exponent(const OccupationMoments& m, const std::vector<DiagonalObservable>& ops, std::size_t min_points,
                        bool two_cell = false, std::string sector = "") {
    auto s = to_chord(connected_correlator(m, ops, translation_pairs(ops.size(), true), std::move(sector)));
    if (two_cell) s = two_cell_average(s);
    return fit_power_law(s, 0.8, min_points);
}

/// Post-measurement sigma^n exponent after projecting onto `pattern`.
FitResult post_exponent(const DenseState& gs, const std::string& pattern) {
    const auto sec = expand_pattern(pattern, gs.geometry());
    const auto post = project(gs, sec);
    return ring_exponent(occupation_moments(post.state), build_sigma_n(sec), 3, false, sec.pattern);
}

std::uint64_t fibonacci(int n) {
    std::uint64_t a = 0, b = 1;
    for (int i = 0; i < n; ++i) {
        const auto c = a + b;
        a = b;
        b = c;
    }
    return a;
}

std::uint64_t lucas(int n) { return fibonacci(n - 1) + fibonacci(n + 1); }

std::uint64_t brute_force_count(int L, bool periodic) {
    std::uint64_t count = 0;
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << L); ++c) {
        bool ok = (c & (c >> 1)) == 0;
        if (ok && periodic) ok = !((c & 1) && (c >> (L - 1) & 1));
        count += ok;
    }
    return count;
}

// ---------------------------------------------------------------------------
// Tier 1: exact and oracle properties

Outcome basis_dimensions() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    Detail d;
    for (int L = 3; L <= 24; ++L) {
        const auto open = make_basis({L, Boundary::open, ConstraintMode::hard_blockade})->dimension();
        const auto ring = make_basis({L, Boundary::periodic, ConstraintMode::hard_blockade})->dimension();
        bool here = open == fibonacci(L + 2) && ring == lucas(L);
        if (L <= 20) here = here && open == brute_force_count(L, false) && ring == brute_force_count(L, true);
        if (!here) d << "mismatch at L=" << L << "; ";
        ok = ok && here;
    }
    const double t = seconds_since(t0);
    d << "L=3..24 match F(L+2)/Lucas(L), brute force to L=20, ";
    d.num(t, 3) << " s (limit 5 s)";
    return verdict(ok && t < 5.0, d);
}

Outcome dense_vs_lanczos() {
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::uniform_int_distribution<int> len(6, 12);
    GroundStateOptions o;
    o.allow_degenerate = true;
    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        HamiltonianParams p;
        p.omega = 0.5 + std::abs(u(rng));
        p.delta = u(rng);
        p.v2 = u(rng);
        const ChainGeometry g{len(rng), draw % 2 ? Boundary::open : Boundary::periodic, ConstraintMode::hard_blockade};
        auto basis = make_basis(g);
        const auto H = build_hamiltonian(p, g, *basis);
        const auto a = ground_state_dense(H, basis, o);
        const auto b = ground_state_lanczos(H, basis, o);
        worst = std::max(worst, std::abs(a.energy - b.energy) / std::abs(a.energy));
    }
    Detail d;
    d << "max relative energy difference over 20 draws ";
    d.num(worst, 3) << " (limit 1e-10)";
    return verdict(worst < 1e-10, d);
}

Outcome probability_completeness() {
    const auto& s = states().ring(CriticalModel::ising, 12);
    const std::vector<int> sites{0, 2, 4, 6, 8, 10};
    double total = 0.0;
    for (double p : enumerate_sector_probabilities(s, sites)) total += p;
    const auto sec = expand_pattern("n[2j]=0", s.geometry());
    double product = 1.0;
    for (double c : conditional_probabilities(s, sec).values) product *= c;
    const double gap = std::abs(product - sector_probability(s, sec));
    Detail d;
    d << "sum over 64 outcomes - 1 = ";
    d.num(total - 1.0, 3) << ", conditional product - P = ";
    d.num(gap, 3) << " (limits 1e-10)";
    return verdict(std::abs(total - 1.0) < 1e-10 && gap < 1e-10, d);
}

Outcome weak_to_projective() {
    const auto& s = states().ring(CriticalModel::ising, 16);
    const auto sec = expand_pattern("n[2j]=0", s.geometry());
    const auto target = project(s, sec).state;
    const double fw = std::pow(overlap(weak_measure(s, sec, 40.0), target), 2);
    const double fg = std::pow(overlap(generalized_measure(s, 40.0, kPi / 4), target), 2);
    Detail d;
    d << "1 - F(weak, beta=40) = ";
    d.num(1.0 - fw, 3) << ", 1 - F(generalized, theta=pi/4) = ";
    d.num(1.0 - fg, 3) << " (limit 1e-6)";
    return verdict(fw >= 1.0 - 1e-6 && fg >= 1.0 - 1e-6, d);
}

Outcome restricted_averaging() {
    const auto& s = states().ring(CriticalModel::ising, 16);
    const auto sec = expand_pattern("n[2j]=0", s.geometry());
    constexpr std::size_t n = 1000000;
    const auto kept = filter_sector(sample_shots(s, n, 2026), sec);
    const double p = sector_probability(s, sec);
    const double sigma_p = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const double z_ret = std::abs(kept.retention() - p) / sigma_p;

    const auto ops = build_sigma_n(sec);
    const auto pairs = translation_pairs(ops.size(), true);
    const auto est = estimate_connected(kept, ops, pairs);
    const auto exact = connected_correlator(occupation_moments(project(s, sec).state), ops, pairs);
    double z_max = 0.0;
    bool aligned = est.size() == exact.size();
    for (std::size_t k = 0; aligned && k < est.size(); ++k) {
        aligned = est.points[k].separation == exact.points[k].separation && est.points[k].error.has_value();
        if (aligned) z_max = std::max(z_max, std::abs(est.points[k].value - exact.points[k].value) / *est.points[k].error);
    }
    Detail d;
    d << kept.size() << " of " << n << " shots kept; retention |z| = ";
    d.num(z_ret, 3) << ", worst correlator |z| = ";
    d.num(z_max, 3) << " over " << est.size() << " points (limit 3)";
    return verdict(aligned && z_ret < 3.0 && z_max < 3.0, d);
}

Outcome translated_sectors() {
    double worst = 0.0;
    for (auto m : {CriticalModel::ising, CriticalModel::tci}) {
        const auto& s = states().ring(m, 12);
        const double p0 = sector_probability(s, expand_pattern("n[3j]=0", s.geometry()));
        for (const char* pat : {"n[3j+1]=0", "n[3j+2]=0"})
            worst = std::max(worst, std::abs(sector_probability(s, expand_pattern(pat, s.geometry())) - p0));
    }
    Detail d;
    d << "max |P_r - P_0| over r = 1, 2 and both presets = ";
    d.num(worst, 3) << " (limit 1e-10)";
    return verdict(worst < 1e-10, d);
}

// ---------------------------------------------------------------------------
// Tier 1: desk-scale reproductions

Outcome ising_premeasurement() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& s = states().ring(CriticalModel::ising, 24);
    const auto m = occupation_moments(s);
    const ChainGeometry g = s.geometry();
    const auto sig = ring_exponent(m, sigma_bonds(g), 4);
    const auto eps = ring_exponent(m, epsilon_bonds(g), 4, true);
    const double t = seconds_since(t0);
    Detail d;
    d << "Dsigma = ";
    d.num(sig.exponent) << " (0.125 +- 0.02), Depsilon = ";
    d.num(eps.exponent) << " (1.0 +- 0.15), ";
    d.num(t, 3) << " s";
    return verdict(std::abs(sig.exponent - 0.125) <= 0.02 && std::abs(eps.exponent - 1.0) <= 0.15 && t < 600.0, d);
}

Outcome tci_premeasurement() {
    const auto& s = states().ring(CriticalModel::tci, 24);
    const auto sig = ring_exponent(occupation_moments(s), sigma_bonds(s.geometry()), 4);
    Detail d;
    d << "Dsigma = ";
    d.num(sig.exponent) << " (0.075 +- 0.015)";
    return verdict(std::abs(sig.exponent - 0.075) <= 0.015, d);
}

Outcome ising_postmeasurement() {
    const auto& s = states().ring(CriticalModel::ising, 24);
    const double even = post_exponent(s, "n[2j]=0").exponent;
    const double third = post_exponent(s, "n[3j]=0").exponent;
    const double pair = post_exponent(s, "n[3j]=0,n[3j+1]=0").exponent;
    Detail d;
    d << "{n_2j=0}: ";
    d.num(even) << " (2 +- 0.3); {n_3j=0}: ";
    d.num(third) << " (0.27 +- 0.10); {n_3j,n_3j+1=0}: ";
    d.num(pair) << "; ordering " << (third < pair && pair < even ? "holds" : "violated");
    return verdict(std::abs(even - 2.0) <= 0.3 && std::abs(third - 0.27) <= 0.10 && third < pair && pair < even, d);
}

Outcome tci_postmeasurement() {
    const auto& s = states().ring(CriticalModel::tci, 24);
    const double ones = post_exponent(s, "n[4j]=1").exponent;
    const double pair = post_exponent(s, "n[4j]=0,n[4j+1]=0").exponent;
    const double even = post_exponent(s, "n[2j]=0").exponent;
    Detail d;
    d << "{n_4j=1}: ";
    d.num(ones) << " (2 +- 0.35); {n_4j,n_4j+1=0}: ";
    d.num(pair) << " (1.5 +- 0.35); {n_2j=0}: ";
    d.num(even) << " (in (0.4, 1.2), below both)";
    const bool ok = std::abs(ones - 2.0) <= 0.35 && std::abs(pair - 1.5) <= 0.35 && even > 0.4 && even < 1.2 &&
                    even < ones && even < pair;
    return verdict(ok, d);
}

Outcome detuning_crossing() {
    std::vector<double> grid;
    for (int i = 0; i <= 24; ++i) grid.push_back(0.60 + 0.005 * i);
    const auto fam = scan_detuning({11, 15, 19, 23}, grid, critical_preset(CriticalModel::ising, ConstraintMode::hard_blockade));
    const auto r = find_curve_crossing(fam);
    constexpr double anchor = 0.66445;
    Detail d;
    d << "pair crossings";
    for (const auto& p : r.pairs) {
        d << " (" << p.size_a << "," << p.size_b << ")=";
        d.num(p.value);
    }
    d << "; Delta_c = ";
    d.num(r.value) << " in [0.64, 0.69]";
    const bool drifts = std::abs(r.pairs.back().value - anchor) < std::abs(r.pairs.front().value - anchor);
    d << ", drift toward 0.66445 " << (drifts ? "yes" : "no");
    return verdict(r.value >= 0.64 && r.value <= 0.69 && drifts, d);
}

Outcome theta_crossing() {
    std::vector<DenseState> rings;
    for (int L : {12, 16, 20, 24}) rings.push_back(states().ring(CriticalModel::tci, L));
    std::vector<double> thetas;
    for (int i = 0; i <= 40; ++i) thetas.push_back((0.15 + 0.0025 * i) * kPi);
    Detail d;
    std::vector<double> crossings;
    for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        const auto r = find_curve_crossing(sweep_theta(rings, beta, thetas));
        crossings.push_back(r.value / kPi);
        d << "beta=" << beta << ": ";
        d.num(r.value / kPi, 4) << "pi; ";
    }
    bool monotone = true;
    for (std::size_t k = 1; k < crossings.size(); ++k) monotone = monotone && crossings[k] > crossings[k - 1];
    monotone = monotone && crossings.back() < 0.25;
    d << "beta=1 target 0.221pi +- 0.015pi, monotone toward pi/4 " << (monotone ? "yes" : "no");
    return verdict(std::abs(crossings[1] - 0.221) <= 0.015 && monotone, d);
}

Outcome probability_decay() {
    Detail d;
    bool ok = true;
    for (auto m : {CriticalModel::ising, CriticalModel::tci}) {
        std::vector<std::pair<int, double>> even, pair;
        for (int L = 8; L <= 28; L += 4) {
            const auto& s = states().ring(m, L);
            even.emplace_back(L, sector_probability(s, expand_pattern("n[2j]=0", s.geometry())));
        }
        for (int L = 9; L <= 27; L += 3) {
            const auto& s = states().ring(m, L);
            pair.emplace_back(L, sector_probability(s, expand_pattern("n[3j]=0,n[3j+1]=0", s.geometry())));
        }
        const auto fe = fit_probability_decay(even, 0.5);
        const auto fp = fit_probability_decay(pair, 2.0 / 3.0);
        const double p100 = fe.extrapolate(100);
        d << to_string(m) << ": P(100) = ";
        d.num(p100, 4) << " (>= 0.03), kappa {n_2j} = ";
        d.num(fe.decay(), 4) << " < kappa {n_3j,n_3j+1} = ";
        d.num(fp.decay(), 4) << "; ";
        ok = ok && p100 >= 0.03 && fp.decay() > fe.decay();
    }
    return verdict(ok, d);
}

Outcome entanglement() {
    Detail d;
    bool ok = true;
    std::vector<double> pre;
    for (auto m : {CriticalModel::ising, CriticalModel::tci}) {
        std::vector<double> s;
        for (int L : {12, 16, 20, 24}) s.push_back(half_chain_entropy(states().ring(m, L), L / 2));
        bool rising = true;
        for (std::size_t k = 1; k < s.size(); ++k) rising = rising && s[k] > s[k - 1];
        d << to_string(m) << " S(12..24) " << (rising ? "increasing" : "NOT increasing") << "; ";
        ok = ok && rising;
        if (m == CriticalModel::ising) pre = s;
    }
    std::vector<double> post;
    for (int L : {20, 24}) {
        const auto& s = states().ring(CriticalModel::ising, L);
        post.push_back(half_chain_entropy(project(s, expand_pattern("n[4j]=1", s.geometry())).state, L / 2));
    }
    const double dpre = pre[3] - pre[2];
    const double dpost = post[1] - post[0];
    d << "Ising L=20->24 increment: pre ";
    d.num(dpre, 4) << ", after {n_4j=1} ";
    d.num(dpost, 4) << " (limit pre/3)";
    return verdict(ok && dpost < dpre / 3.0, d);
}

// ---------------------------------------------------------------------------
// Tier 2: DMRG

Outcome dmrg_vs_ed() {
    Detail d;
    bool ok = true;
    for (auto m : {CriticalModel::ising, CriticalModel::tci}) {
        const ChainGeometry g{20, Boundary::open, ConstraintMode::hard_blockade};
        const auto p = critical_preset(m, g.mode);
        auto basis = make_basis(g);
        const auto ed = ground_state_auto(build_hamiltonian(p, g, *basis), basis);
        DmrgConfig cfg;
        cfg.chi_max = 128;
        const auto r = dmrg_ground_state(build_mpo(p, g), cfg, 1);
        const double rel = std::abs(r.energy - ed.energy) / std::abs(ed.energy);
        const auto a = one_point_profile(ed.state, sigma_bonds(g));
        const auto b = one_point_profile(r.state, sigma_bonds(g));
        double worst = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a.points[k].value - b.points[k].value));
        d << to_string(m) << ": energy rel ";
        d.num(rel, 3) << ", profile max ";
        d.num(worst, 3) << "; ";
        ok = ok && rel < 1e-8 && worst < 1e-6;
    }
    d << "(limits 1e-8, 1e-6)";
    return verdict(ok, d);
}

struct LongChainFit {
    double pre = 0.0;        ///< sine fit, longest-range 80%
    double post = 0.0;       ///< derivative fit, longest-range 80%
    double pre_conv = 0.0;   ///< same fits over the longest-range 90%, for the bond-dimension check
    double post_conv = 0.0;
};

LongChainFit long_chain(int chi) {
    const ChainGeometry g{121, Boundary::open, ConstraintMode::hard_blockade};
    DmrgConfig cfg;
    cfg.chi_max = chi;
    const auto r = dmrg_ground_state(build_mpo(critical_preset(CriticalModel::ising, g.mode), g), cfg, 1);
    LongChainFit f;
    const auto pre = one_point_profile(r.state, sigma_bonds(g));
    f.pre = fit_obc_sine(pre, g.length, 0.8, 4).exponent;
    f.pre_conv = fit_obc_sine(pre, g.length, 0.9, 4).exponent;
    const auto sec = expand_pattern("n[2j]=0", g);
    const auto post = project(r.state, sec);
    const auto prof = one_point_profile(post.state, build_sigma_n(sec), sec.pattern);
    f.post = fit_obc_derivative(prof, g.length, 0.8, 4, DerivativeAxis::sine).exponent;
    f.post_conv = fit_obc_derivative(prof, g.length, 0.9, 4, DerivativeAxis::sine).exponent;
    return f;
}

Outcome long_open_chain() {
    const char* flag = std::getenv("RYDCRIT_TIER2");
    if (flag == nullptr || std::string(flag) != "1") return {Status::skip, "set RYDCRIT_TIER2=1 to run (hours)"};
    const auto a = long_chain(250);
    const auto b = long_chain(500);
    Detail d;
    d << "chi=250: pre ";
    d.num(a.pre) << " (0.123 +- 0.006), {n_2j=0} ";
    d.num(a.post) << " (1.95 +- 0.10); chi=500 changes the 90% fits by ";
    const double dpre = std::abs(b.pre_conv - a.pre_conv);
    const double dpost = std::abs(b.post_conv - a.post_conv);
    d.num(dpre, 3) << " / ";
    d.num(dpost, 3) << " (limit 0.005)";
    const bool ok = std::abs(a.pre - 0.123) <= 0.006 && std::abs(a.post - 1.95) <= 0.10 && dpre < 0.005 && dpost < 0.005;
    return verdict(ok, d);
}

Outcome full_scale() {
    return {Status::not_applicable, "full-scale L = 120 periodic values and L > 40 probability curves are out of scope"};
}

} // namespace

int main(int argc, char** argv) {
    bool strict = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--strict") strict = true;
        else {
            std::cerr << "usage: rydcrit_acceptance [--strict]\n";
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "basis dimensions", true, basis_dimensions},
        {2, "dense vs Lanczos energies", true, dense_vs_lanczos},
        {3, "probability completeness", true, probability_completeness},
        {4, "weak and generalized measurement limits", true, weak_to_projective},
        {5, "shot post-selection vs exact", true, restricted_averaging},
        {6, "translated sector probabilities", true, translated_sectors},
        {7, "pre-measurement Ising exponents (L=24)", true, ising_premeasurement},
        {8, "pre-measurement TCI Dsigma (L=24)", true, tci_premeasurement},
        {9, "post-measurement Ising Dsigma (L=24)", true, ising_postmeasurement},
        {10, "post-measurement TCI Dsigma (L=24)", true, tci_postmeasurement},
        {11, "detuning curve crossing", true, detuning_crossing},
        {12, "theta sweep crossing", true, theta_crossing},
        {13, "post-selection probability decay", true, probability_decay},
        {14, "entanglement growth and area law", true, entanglement},
        {15, "DMRG vs ED (L=20, chi=128)", false, dmrg_vs_ed},
        {16, "long open chain (L=121)", false, long_open_chain},
        {17, "full-scale reproductions", false, full_scale},
    };

    std::cout << "rydcrit " << kVersion << " acceptance suite\n";
    int tier1_failed = 0, failed = 0;
    const auto t_all = std::chrono::steady_clock::now();
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("error: ") + e.what()};
        }
        const char* tag = "FAIL";
        switch (o.status) {
            case Status::pass: tag = "PASS"; break;
            case Status::fail: tag = "FAIL"; break;
            case Status::skip: tag = "SKIP"; break;
            case Status::not_applicable: tag = "N/A "; break;
        }
        if (o.status == Status::fail) {
            ++failed;
            if (c.tier1) ++tier1_failed;
        }
        std::cout << tag << "  #" << std::left << std::setw(3) << c.id << std::right << "[tier " << (c.tier1 ? 1 : 2)
                  << "] " << c.title << ": " << o.detail << "  (" << std::fixed << std::setprecision(1)
                  << seconds_since(t0) << " s)" << std::defaultfloat << std::endl;
    }
    std::cout << "summary: " << tier1_failed << " tier-1 and " << failed - tier1_failed << " tier-2 criteria failed in "
              << std::fixed << std::setprecision(0) << seconds_since(t_all) << " s" << std::endl;
    return strict && failed > 0 ? 1 : 0;
}
