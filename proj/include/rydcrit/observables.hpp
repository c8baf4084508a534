// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file observables.hpp
 * @brief Occupation-diagonal lattice operators for the sigma and epsilon fields.
 *
 * Pre-measurement operators live on bonds (j, j+1):
 *
 *   sigma_{j+1/2}   = (-1)^j (n_j - n_{j+1}) / 2
 *   epsilon_{j+1/2} = (n_j + n_{j+1}) / 2
 *
 * After a periodic measurement each unit cell contributes one operator built
 * from its unmeasured sites Lambda:
 *
 *   sigma^n   = (1/|Lambda|) sum_{k in Lambda} (-1)^k n_k
 *   epsilon^n = (1/|Lambda|) sum_{k in Lambda} n_k
 *
 * When the pattern has odd period and is symmetric under a bond reflection
 * whose centre sits between measured sites, a single cell cannot carry a
 * reflection-odd operator, so Lambda is extended over two adjacent cells
 * (k and k + p), which makes sigma^n antisymmetric across the reflection.
 *
 * Every observable is a linear combination of occupations, so expectation
 * values need only <n_i> and connected correlators only <n_i n_k>. Both are
 * gathered once per state in OccupationMoments.
 */

#pragma once

#include <rydcrit/dense_state.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/lattice_basis.hpp>
#include <rydcrit/pattern.hpp>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rydcrit {

/// Exact rational number, used for operator centres (integers and half-integers in practice).
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
        if (den == 0) throw ConfigError("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const auto g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    [[nodiscard]] double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    [[nodiscard]] std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }

    friend bool operator==(const Rational& a, const Rational& b) noexcept { return a.num == b.num && a.den == b.den; }
    friend bool operator<(const Rational& a, const Rational& b) noexcept { return a.num * b.den < b.num * a.den; }
};

struct DiagonalObservable {
    std::vector<std::pair<int, double>> terms;   ///< (site, coefficient), sites ascending and distinct
    std::string label;
    Rational center;                             ///< position in site units, reduced onto [0, L) on rings

    [[nodiscard]] bool overlaps(const DiagonalObservable& other) const noexcept {
        for (const auto& [a, ca] : terms)
            for (const auto& [b, cb] : other.terms)
                if (a == b) return true;
        return false;
    }
    [[nodiscard]] double evaluate(Config c) const noexcept {
        double v = 0.0;
        for (const auto& [site, coeff] : terms)
            if (occupied(c, site)) v += coeff;
        return v;
    }
    [[nodiscard]] Eigen::VectorXd coefficients(int length) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(length);
        for (const auto& [site, c] : terms) v[site] += c;
        return v;
    }
};

namespace detail {

/// Merge duplicate sites, drop zero coefficients, sort by site.
inline DiagonalObservable make_observable(std::vector<std::pair<int, double>> terms, std::string label,
                                          Rational center, const ChainGeometry& g) {
    for (auto& t : terms) {
        if (g.periodic()) t.first = g.wrap(t.first);
        if (t.first < 0 || t.first >= g.length)
            throw ConfigError("observable site " + std::to_string(t.first) + " outside chain of length " +
                              std::to_string(g.length));
    }
    std::sort(terms.begin(), terms.end());
    std::vector<std::pair<int, double>> merged;
    for (const auto& t : terms) {
        if (!merged.empty() && merged.back().first == t.first) merged.back().second += t.second;
        else merged.push_back(t);
    }
    std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
    if (g.periodic()) {
        const std::int64_t L = g.length;
        std::int64_t n = center.num % (L * center.den);
        if (n < 0) n += L * center.den;
        center = Rational(n, center.den);
    }
    return DiagonalObservable{std::move(merged), std::move(label), center};
}

inline int stagger(int site) noexcept { return (site % 2 == 0) ? 1 : -1; }

inline int bond_partner(const ChainGeometry& g, int j) {
    if (j < 0 || j >= g.length) throw ConfigError("bond index " + std::to_string(j) + " out of range");
    if (j + 1 < g.length) return j + 1;
    if (!g.periodic()) throw ConfigError("bond " + std::to_string(j) + " has no right partner on an open chain");
    return 0;
}

} // namespace detail

[[nodiscard]] inline DiagonalObservable sigma_bond_observable(const ChainGeometry& g, int j) {
    const int k = detail::bond_partner(g, j);
    if (g.periodic() && g.length % 2 != 0)
        throw ConfigError("staggered operators need an even periodic chain");
    const double s = 0.5 * detail::stagger(j);
    return detail::make_observable({{j, s}, {k, -s}}, "sigma", Rational(2 * j + 1, 2), g);
}

[[nodiscard]] inline DiagonalObservable epsilon_bond_observable(const ChainGeometry& g, int j) {
    const int k = detail::bond_partner(g, j);
    return detail::make_observable({{j, 0.5}, {k, 0.5}}, "epsilon", Rational(2 * j + 1, 2), g);
}

/// All bonds of the chain (L on rings, L - 1 on open chains).
[[nodiscard]] inline std::vector<DiagonalObservable> sigma_bonds(const ChainGeometry& g) {
    std::vector<DiagonalObservable> out;
    for (int j = 0; j < (g.periodic() ? g.length : g.length - 1); ++j) out.push_back(sigma_bond_observable(g, j));
    return out;
}
[[nodiscard]] inline std::vector<DiagonalObservable> epsilon_bonds(const ChainGeometry& g) {
    std::vector<DiagonalObservable> out;
    for (int j = 0; j < (g.periodic() ? g.length : g.length - 1); ++j) out.push_back(epsilon_bond_observable(g, j));
    return out;
}

/// Unit-cell layout of a sector: where cells start and which offsets are unmeasured.
struct CellLayout {
    int period = 1;                 ///< minimal period q of the outcome pattern
    int origin = 0;                 ///< first site of cell 0 (start of a measured block)
    std::vector<int> lambda;        ///< unmeasured offsets within a cell
    bool extended = false;          ///< Lambda spans two adjacent cells
    int cells = 0;                  ///< complete cells on the chain
};

[[nodiscard]] inline CellLayout cell_layout(const OutcomeSector& s) {
    CellLayout c;
    const int q = s.minimal_period;
    c.period = q;
    const auto res = [&](int r) { return s.residues[static_cast<std::size_t>(((r % q) + q) % q)]; };
    bool found = false;
    for (int r = 0; r < q && !found; ++r) {
        if (res(r) >= 0 && res(r - 1) < 0) {
            c.origin = r;
            found = true;
        }
    }
    if (!found) throw ConfigError("every site of the unit cell is measured; no operator can be built");
    for (int r = 0; r < q; ++r)
        if (res(c.origin + r) < 0) c.lambda.push_back(r);

    if (s.preserves_bond_reflection && q % 2 == 1) {
        // Extend unless some symmetric bond centre lies between two unmeasured sites.
        bool inner_centre = false;
        for (int centre = 0; centre < q; ++centre) {
            bool symmetric = true;
            for (int r = 0; r < q && symmetric; ++r) symmetric = res(r) == res(2 * centre - 1 - r);
            if (symmetric && res(centre - 1) < 0 && res(centre) < 0) inner_centre = true;
        }
        c.extended = !inner_centre;
    }

    const int L = s.geometry.length;
    if (s.geometry.periodic()) {
        if (L % q != 0) throw ConfigError("pattern period does not divide the ring length");
        c.cells = L / q;
    } else {
        c.cells = (L - c.origin) / q;
    }
    return c;
}

namespace detail {

/// Unwrapped site lists of the Lambda set of every operator, plus their count.
inline std::vector<std::vector<int>> lambda_sets(const OutcomeSector& s, const CellLayout& c) {
    std::vector<std::vector<int>> sets;
    const bool ring = s.geometry.periodic();
    const int n_ops = c.extended ? (ring ? c.cells : c.cells - 1) : c.cells;
    for (int cell = 0; cell < n_ops; ++cell) {
        std::vector<int> sites;
        for (const int r : c.lambda) sites.push_back(c.origin + cell * c.period + r);
        if (c.extended)
            for (const int r : c.lambda) sites.push_back(c.origin + (cell + 1) * c.period + r);
        sets.push_back(std::move(sites));
    }
    return sets;
}

inline Rational centre_of(const std::vector<int>& sites) {
    const std::int64_t sum = std::accumulate(sites.begin(), sites.end(), std::int64_t{0});
    return Rational(sum, static_cast<std::int64_t>(sites.size()));
}

} // namespace detail

/**
 * One sigma^n operator per unit cell (or per adjacent pair of cells when Lambda
 * is extended).
 */
[[nodiscard]] inline std::vector<DiagonalObservable> build_sigma_n(const OutcomeSector& s) {
    const auto& g = s.geometry;
    if (g.periodic() && g.length % 2 != 0) throw ConfigError("staggered operators need an even periodic chain");
    const CellLayout c = cell_layout(s);
    std::vector<DiagonalObservable> out;
    for (const auto& sites : detail::lambda_sets(s, c)) {
        const double w = 1.0 / static_cast<double>(sites.size());
        std::vector<std::pair<int, double>> terms;
        for (const int k : sites) terms.emplace_back(k, w * detail::stagger(g.periodic() ? g.wrap(k) : k));
        out.push_back(detail::make_observable(std::move(terms), "sigma^n", detail::centre_of(sites), g));
    }
    return out;
}

/// epsilon^n on the same Lambda sets; only defined for reflection-symmetric sectors.
[[nodiscard]] inline std::vector<DiagonalObservable> build_epsilon_n(const OutcomeSector& s) {
    if (!s.preserves_bond_reflection)
        throw ConfigError("epsilon^n needs a sector symmetric under bond reflection; '" + s.pattern +
                          "' breaks it");
    const CellLayout c = cell_layout(s);
    std::vector<DiagonalObservable> out;
    for (const auto& sites : detail::lambda_sets(s, c)) {
        const double w = 1.0 / static_cast<double>(sites.size());
        std::vector<std::pair<int, double>> terms;
        for (const int k : sites) terms.emplace_back(k, w);
        out.push_back(detail::make_observable(std::move(terms), "epsilon^n", detail::centre_of(sites), s.geometry));
    }
    return out;
}

/// True for translates of the pattern with two measured zeros and one free site per 3-site cell.
[[nodiscard]] inline bool is_z2_epsilon_sector(const OutcomeSector& s) noexcept {
    if (s.minimal_period != 3) return false;
    int zeros = 0, free = 0;
    for (int r = 0; r < 3; ++r) {
        const int o = s.residues[static_cast<std::size_t>(r % s.residues.size())];
        zeros += o == 0;
        free += o < 0;
    }
    return zeros == 2 && free == 1;
}

/// (n_{l-3} + 2 n_l + n_{l+3}) / 4 on every unmeasured site l.
[[nodiscard]] inline std::vector<DiagonalObservable> build_epsilon_z2(const OutcomeSector& s) {
    if (!is_z2_epsilon_sector(s))
        throw ConfigError("epsilon^{n,Z2} is only defined for the {n_3j, n_3j+1 = 0} family, got '" + s.pattern + "'");
    const auto& g = s.geometry;
    std::vector<DiagonalObservable> out;
    for (int l = 0; l < g.length; ++l) {
        if (s.measured(l)) continue;
        if (!g.periodic() && (l - 3 < 0 || l + 3 >= g.length)) continue;
        out.push_back(detail::make_observable({{l - 3, 0.25}, {l, 0.5}, {l + 3, 0.25}}, "epsilon^n,Z2", Rational(l), g));
    }
    return out;
}

/// <n_i> and <n_i n_k> of a state; the diagonal of `joint` equals `mean`.
struct OccupationMoments {
    ChainGeometry geometry;
    Eigen::VectorXd mean;
    Eigen::MatrixXd joint;

    [[nodiscard]] Eigen::MatrixXd covariance() const { return joint - mean * mean.transpose(); }
};

[[nodiscard]] inline Eigen::VectorXd occupations(const DenseState& state) {
    const int L = state.length();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(L);
    const auto configs = state.basis->configs();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const double w = state.amplitudes[static_cast<Eigen::Index>(i)] * state.amplitudes[static_cast<Eigen::Index>(i)];
        for (Config c = configs[i]; c != 0; c &= c - 1) m[std::countr_zero(c)] += w;
    }
    return m;
}

[[nodiscard]] inline OccupationMoments occupation_moments(const DenseState& state) {
    const int L = state.length();
    OccupationMoments out{state.geometry(), Eigen::VectorXd::Zero(L), Eigen::MatrixXd::Zero(L, L)};
    const auto configs = state.basis->configs();
    std::vector<int> occ;
    occ.reserve(static_cast<std::size_t>(L));
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const double w = state.amplitudes[static_cast<Eigen::Index>(i)] * state.amplitudes[static_cast<Eigen::Index>(i)];
        if (w == 0.0) continue;
        occ.clear();
        for (Config c = configs[i]; c != 0; c &= c - 1) occ.push_back(std::countr_zero(c));
        for (std::size_t a = 0; a < occ.size(); ++a)
            for (std::size_t b = a; b < occ.size(); ++b) out.joint(occ[a], occ[b]) += w;
    }
    out.joint.template triangularView<Eigen::StrictlyLower>() = out.joint.transpose();
    out.mean = out.joint.diagonal();
    return out;
}

namespace detail {
inline void check_sites(const DiagonalObservable& obs, int length) {
    for (const auto& [site, c] : obs.terms)
        if (site < 0 || site >= length)
            throw ConfigError("observable '" + obs.label + "' touches site " + std::to_string(site) +
                              " outside a chain of length " + std::to_string(length));
}
} // namespace detail

[[nodiscard]] inline double expectation(const Eigen::VectorXd& mean, const DiagonalObservable& obs) {
    detail::check_sites(obs, static_cast<int>(mean.size()));
    double v = 0.0;
    for (const auto& [site, c] : obs.terms) v += c * mean[site];
    return v;
}
[[nodiscard]] inline double expectation(const OccupationMoments& m, const DiagonalObservable& obs) {
    return expectation(m.mean, obs);
}
[[nodiscard]] inline double expectation(const DenseState& state, const DiagonalObservable& obs) {
    return expectation(occupations(state), obs);
}

[[nodiscard]] inline double sigma_bond(const DenseState& state, int j) {
    return expectation(state, sigma_bond_observable(state.geometry(), j));
}
[[nodiscard]] inline double epsilon_bond(const DenseState& state, int j) {
    return expectation(state, epsilon_bond_observable(state.geometry(), j));
}

// ---------------------------------------------------------------------------
// Correlator series

struct SeriesPoint {
    double separation = 0.0;
    double value = 0.0;
    std::optional<double> error;
};

struct SeriesMeta {
    std::string label;
    int length = 0;
    Boundary boundary = Boundary::periodic;
    std::string sector;                  ///< canonical pattern, empty before measurement
    std::string kind = "connected";      ///< "connected" or "profile"
    std::string distance = "raw";        ///< "raw", "chord" or "x"
};

struct CorrelatorSeries {
    std::vector<SeriesPoint> points;
    SeriesMeta meta;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
    [[nodiscard]] Eigen::VectorXd separations() const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(points.size()));
        for (std::size_t i = 0; i < points.size(); ++i) v[static_cast<Eigen::Index>(i)] = points[i].separation;
        return v;
    }
    [[nodiscard]] Eigen::VectorXd values() const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(points.size()));
        for (std::size_t i = 0; i < points.size(); ++i) v[static_cast<Eigen::Index>(i)] = points[i].value;
        return v;
    }
};

using ObservablePair = std::pair<std::size_t, std::size_t>;

/**
 * Pairs for a translation-invariant family: (0, m) for m = 1..n/2 on rings,
 * and pairs placed symmetrically about the chain centre on open chains.
 */
[[nodiscard]] inline std::vector<ObservablePair> translation_pairs(std::size_t n, bool periodic) {
    std::vector<ObservablePair> pairs;
    if (periodic) {
        for (std::size_t m = 1; m <= n / 2; ++m) pairs.emplace_back(0, m);
    } else {
        for (std::size_t m = 1; m < n; ++m) {
            const std::size_t first = (n - 1 - m) / 2;
            pairs.emplace_back(first, first + m);
        }
    }
    return pairs;
}

/// |l1 - l2|, reduced to [0, L/2] on rings.
[[nodiscard]] inline double raw_separation(const Rational& a, const Rational& b, const ChainGeometry& g) {
    double d = std::abs(a.value() - b.value());
    if (g.periodic()) d = std::min(d, g.length - d);
    return d;
}

namespace detail {

/// Sort by separation and average points whose separations coincide.
inline void collapse_points(std::vector<SeriesPoint>& pts) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.separation < b.separation; });
    std::vector<SeriesPoint> out;
    std::size_t i = 0;
    while (i < pts.size()) {
        std::size_t j = i;
        double sum = 0.0, err2 = 0.0;
        bool has_err = false;
        while (j < pts.size() && std::abs(pts[j].separation - pts[i].separation) < 1e-9) {
            sum += pts[j].value;
            if (pts[j].error) {
                has_err = true;
                err2 += *pts[j].error * *pts[j].error;
            }
            ++j;
        }
        const double n = static_cast<double>(j - i);
        SeriesPoint p{pts[i].separation, sum / n, std::nullopt};
        // Coinciding points are images of one another, so their errors are not independent.
        if (has_err) p.error = std::sqrt(err2 / n);
        out.push_back(p);
        i = j;
    }
    pts = std::move(out);
}

} // namespace detail

/**
 * <AB> - <A><B> for each pair. Pairs whose supports overlap are skipped;
 * coinciding separations are averaged.
 */
[[nodiscard]] inline CorrelatorSeries connected_correlator(const OccupationMoments& m,
                                                           const std::vector<DiagonalObservable>& obs,
                                                           const std::vector<ObservablePair>& pairs,
                                                           std::string sector = {}) {
    const int L = m.geometry.length;
    const Eigen::MatrixXd cov = m.covariance();
    CorrelatorSeries out;
    out.meta = SeriesMeta{obs.empty() ? std::string("?") : obs.front().label, L, m.geometry.boundary, std::move(sector),
                          "connected", "raw"};
    for (const auto& [a, b] : pairs) {
        if (a >= obs.size() || b >= obs.size()) throw ConfigError("observable pair index out of range");
        const auto& A = obs[a];
        const auto& B = obs[b];
        if (A.overlaps(B)) continue;
        detail::check_sites(A, L);
        detail::check_sites(B, L);
        double v = 0.0;
        for (const auto& [i, ca] : A.terms)
            for (const auto& [k, cb] : B.terms) v += ca * cb * cov(i, k);
        out.points.push_back({raw_separation(A.center, B.center, m.geometry), v, std::nullopt});
    }
    detail::collapse_points(out.points);
    return out;
}

[[nodiscard]] inline CorrelatorSeries connected_correlator(const DenseState& state,
                                                           const std::vector<DiagonalObservable>& obs,
                                                           const std::vector<ObservablePair>& pairs,
                                                           std::string sector = {}) {
    return connected_correlator(occupation_moments(state), obs, pairs, std::move(sector));
}

/// <O_l> against the centre position l. Open chains only.
[[nodiscard]] inline CorrelatorSeries one_point_profile(const Eigen::VectorXd& mean, const ChainGeometry& g,
                                                        const std::vector<DiagonalObservable>& obs,
                                                        std::string sector = {}) {
    if (g.periodic())
        throw ConfigError("one-point profiles are flat on periodic chains; use an open chain or a two-point correlator");
    CorrelatorSeries out;
    out.meta = SeriesMeta{obs.empty() ? std::string("?") : obs.front().label, g.length, g.boundary, std::move(sector),
                          "profile", "raw"};
    for (const auto& o : obs) out.points.push_back({o.center.value(), expectation(mean, o), std::nullopt});
    std::stable_sort(out.points.begin(), out.points.end(),
                     [](const auto& a, const auto& b) { return a.separation < b.separation; });
    return out;
}

[[nodiscard]] inline CorrelatorSeries one_point_profile(const DenseState& state,
                                                        const std::vector<DiagonalObservable>& obs,
                                                        std::string sector = {}) {
    return one_point_profile(occupations(state), state.geometry(), obs, std::move(sector));
}

/// Von Neumann entropy (natural log) of sites [0, cut).
[[nodiscard]] inline double half_chain_entropy(const DenseState& state, int cut) {
    const int L = state.length();
    if (cut < 0 || cut > L) throw ConfigError("entanglement cut out of range");
    if (cut == 0 || cut == L) return 0.0;
    const Config left_mask = (Config{1} << cut) - 1;
    std::unordered_map<Config, Eigen::Index> left_idx, right_idx;
    const auto configs = state.basis->configs();
    for (const Config c : configs) {
        left_idx.try_emplace(c & left_mask, static_cast<Eigen::Index>(left_idx.size()));
        right_idx.try_emplace(c >> cut, static_cast<Eigen::Index>(right_idx.size()));
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(left_idx.size()),
                                              static_cast<Eigen::Index>(right_idx.size()));
    for (std::size_t i = 0; i < configs.size(); ++i)
        M(left_idx.at(configs[i] & left_mask), right_idx.at(configs[i] >> cut)) =
            state.amplitudes[static_cast<Eigen::Index>(i)];
    const Eigen::MatrixXd rho = M.rows() <= M.cols() ? Eigen::MatrixXd(M * M.transpose())
                                                     : Eigen::MatrixXd(M.transpose() * M);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    const double total = eig.eigenvalues().sum();
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double p = eig.eigenvalues()[i] / total;
        if (p > 1e-300) s -= p * std::log(p);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Serialisation: CSV body plus JSON metadata sidecar

inline void write_csv(std::ostream& os, const CorrelatorSeries& s) {
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    os << "separation,value,stderr\n";
    for (const auto& p : s.points) {
        os << p.separation << ',' << p.value << ',';
        if (p.error) os << *p.error;
        os << '\n';
    }
    os.precision(old);
}

[[nodiscard]] inline nlohmann::json to_json(const SeriesMeta& m) {
    return nlohmann::json{{"label", m.label},
                          {"L", m.length},
                          {"boundary", std::string(to_string(m.boundary))},
                          {"sector", m.sector},
                          {"kind", m.kind},
                          {"distance", m.distance}};
}

[[nodiscard]] inline SeriesMeta series_meta_from_json(const nlohmann::json& j) {
    SeriesMeta m;
    m.label = j.value("label", std::string{});
    m.length = j.at("L").get<int>();
    m.boundary = parse_boundary(j.at("boundary").get<std::string>());
    m.sector = j.value("sector", std::string{});
    m.kind = j.value("kind", std::string("connected"));
    m.distance = j.value("distance", std::string("raw"));
    return m;
}

[[nodiscard]] inline std::vector<SeriesPoint> read_csv_points(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty correlator CSV");
    if (line.rfind("separation,value", 0) != 0) throw ConfigError("correlator CSV lacks the separation,value header");
    std::vector<SeriesPoint> pts;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        try {
            SeriesPoint p{std::stod(a), std::stod(b), std::nullopt};
            if (!c.empty()) p.error = std::stod(c);
            pts.push_back(p);
        } catch (const std::exception&) {
            throw ConfigError("malformed correlator CSV line " + std::to_string(lineno));
        }
    }
    return pts;
}

} // namespace rydcrit
