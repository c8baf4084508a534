// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file shots.hpp
 * @brief Born-rule snapshots of the whole chain and restricted-averaging estimators.
 *
 * A shot is one projective measurement of every site. Shots are drawn from
 * independent counter-based streams keyed on (seed, shot index), so the
 * result does not depend on the number of threads or on the order in which
 * shots are generated.
 *
 * Post-measurement quantities are estimated the way an experiment would:
 * keep only the shots whose measured sites show the post-selected outcomes
 * and average over the rest.
 *
 * Shot file layout: one line per shot, character j is n_j ('0' or '1'),
 * with a JSON sidecar holding L, boundary, constraint mode, seed and the
 * identifier of the source state.
 */

#pragma once

#include <rydcrit/binary_io.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/lattice_basis.hpp>
#include <rydcrit/observables.hpp>
#include <rydcrit/pattern.hpp>
#include <rydcrit/wavefunction.hpp>

#include <Eigen/Core>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace rydcrit {

/// Default minimum number of retained shots for connected-correlator estimates.
inline constexpr std::size_t kMinRetainedShots = 100;

/// SplitMix64: a tiny counter-friendly generator, one instance per shot.
class ShotStream {
public:
    ShotStream(std::uint64_t seed, std::uint64_t index) noexcept
        : state_(mix(seed ^ mix(index + 0x9e3779b97f4a7c15ull))) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

struct ShotSet {
    ChainGeometry geometry;
    std::vector<std::uint8_t> bits;   ///< row-major, L entries per shot
    std::uint64_t seed = 0;
    std::string source;               ///< identifier of the sampled state
    std::string sector;               ///< canonical pattern after filtering, empty otherwise
    std::size_t parent_count = 0;     ///< shots before filtering

    [[nodiscard]] int length() const noexcept { return geometry.length; }
    [[nodiscard]] std::size_t size() const noexcept {
        return geometry.length > 0 ? bits.size() / static_cast<std::size_t>(geometry.length) : 0;
    }
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
    [[nodiscard]] std::span<const std::uint8_t> shot(std::size_t i) const {
        const auto L = static_cast<std::size_t>(geometry.length);
        return {bits.data() + i * L, L};
    }
    [[nodiscard]] std::string shot_string(std::size_t i) const {
        std::string s;
        for (const auto b : shot(i)) s.push_back(b ? '1' : '0');
        return s;
    }
    /// Retained fraction, an unbiased estimate of the sector probability.
    [[nodiscard]] double retention() const noexcept {
        return parent_count == 0 ? 1.0 : static_cast<double>(size()) / static_cast<double>(parent_count);
    }
};

/// Stable identifier of a state: hash of its checkpoint bytes.
[[nodiscard]] inline std::string state_id(const Wavefunction& psi) {
    std::ostringstream os(std::ios::binary);
    write_checkpoint(os, psi);
    return binary::hex64(binary::fnv1a64(os.str()));
}

namespace detail {

inline void check_normalized(double norm) {
    if (!(std::abs(norm - 1.0) < 1e-8))
        throw ConfigError("shot sampling needs a normalised state (norm " + std::to_string(norm) + ")");
}

/**
 * Dense sampler. Configurations sharing a prefix n_0..n_{k-1} occupy a
 * contiguous block of the lexicographic basis, with the n_k = 0 part first,
 * so each site conditional is a ratio of two block weights read off the
 * cumulative weight array.
 */
inline void sample_dense(const DenseState& s, std::size_t n_shots, std::uint64_t seed, std::vector<std::uint8_t>& bits) {
    const auto configs = s.basis->configs();
    const std::size_t dim = configs.size();
    const int L = s.length();
    std::vector<double> cum(dim + 1, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        const double a = s.amplitudes[static_cast<Eigen::Index>(i)];
        cum[i + 1] = cum[i] + a * a;
    }
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(n_shots); ++t) {
        ShotStream rng(seed, static_cast<std::uint64_t>(t));
        std::size_t lo = 0, hi = dim;
        std::uint8_t* out = bits.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(L);
        for (int k = 0; k < L; ++k) {
            const auto first = configs.begin() + static_cast<std::ptrdiff_t>(lo);
            const auto last = configs.begin() + static_cast<std::ptrdiff_t>(hi);
            const auto mid = static_cast<std::size_t>(
                std::partition_point(first, last, [k](Config c) { return !occupied(c, k); }) - configs.begin());
            const double w_all = cum[hi] - cum[lo];
            const double w_one = cum[hi] - cum[mid];
            const bool one = mid < hi && (mid == lo || rng.uniform() * w_all >= w_all - w_one);
            out[k] = one ? 1 : 0;
            if (one) lo = mid;
            else hi = mid;
        }
    }
}

/**
 * Left-to-right perfect sampling from a right-canonical MPS. In hard-blockade
 * mode the occupied branch is closed next to an occupied site, which removes
 * the tiny blockade-violating weight left by truncation.
 */
inline void sample_mps(const MatrixProductState& psi, std::size_t n_shots, std::uint64_t seed,
                       std::vector<std::uint8_t>& bits) {
    const auto rc = right_canonical(psi);
    const int L = rc.length();
    const auto& g = rc.geometry();
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(n_shots); ++t) {
        ShotStream rng(seed, static_cast<std::uint64_t>(t));
        std::uint8_t* out = bits.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(L);
        Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
        for (int k = 0; k < L; ++k) {
            Eigen::RowVectorXd w0 = v * rc.site(k)[0];
            Eigen::RowVectorXd w1 = v * rc.site(k)[1];
            const double p0 = w0.squaredNorm();
            double p1 = w1.squaredNorm();
            if (g.hard()) {
                const bool left_busy = k > 0 && out[k - 1];
                const bool wrap_busy = g.periodic() && k == L - 1 && L > 2 && out[0];
                if (left_busy || wrap_busy) p1 = 0.0;
            }
            const bool one = rng.uniform() * (p0 + p1) >= p0 && p1 > 0.0;
            out[k] = one ? 1 : 0;
            if (one) v = w1 / std::sqrt(p1);
            else v = w0 / std::sqrt(p0);
        }
    }
}

} // namespace detail

/**
 * Draw `n_shots` full-chain snapshots with P(config) = |amplitude|^2.
 * Shot i depends only on (seed, i).
 */
[[nodiscard]] inline ShotSet sample_shots(const Wavefunction& psi, std::size_t n_shots, std::uint64_t seed,
                                          std::string source = {}) {
    ShotSet out;
    out.geometry = geometry_of(psi);
    out.seed = seed;
    out.source = source.empty() ? state_id(psi) : std::move(source);
    out.parent_count = n_shots;
    out.bits.assign(n_shots * static_cast<std::size_t>(out.geometry.length), 0);
    detail::check_normalized(norm_of(psi));
    if (const auto* d = std::get_if<DenseState>(&psi)) detail::sample_dense(*d, n_shots, seed, out.bits);
    else detail::sample_mps(std::get<MatrixProductState>(psi), n_shots, seed, out.bits);
    return out;
}

/// Keep the shots whose measured sites carry the sector outcomes. An empty result is allowed.
[[nodiscard]] inline ShotSet filter_sector(const ShotSet& shots, const OutcomeSector& sector) {
    if (!(shots.geometry == sector.geometry))
        throw ConfigError("sector and shots belong to different chains (sector L=" +
                          std::to_string(sector.geometry.length) + ", shots L=" + std::to_string(shots.length()) + ")");
    ShotSet out;
    out.geometry = shots.geometry;
    out.seed = shots.seed;
    out.source = shots.source;
    out.sector = shots.sector.empty() ? sector.pattern : shots.sector + " & " + sector.pattern;
    out.parent_count = shots.parent_count == 0 ? shots.size() : shots.parent_count;
    for (std::size_t i = 0; i < shots.size(); ++i) {
        const auto s = shots.shot(i);
        bool keep = true;
        for (std::size_t m = 0; m < sector.sites.size() && keep; ++m)
            keep = s[static_cast<std::size_t>(sector.sites[m])] == sector.outcomes[m];
        if (keep) out.bits.insert(out.bits.end(), s.begin(), s.end());
    }
    return out;
}

/// Value of a diagonal observable on one shot.
[[nodiscard]] inline double evaluate(const DiagonalObservable& obs, std::span<const std::uint8_t> shot) {
    double v = 0.0;
    for (const auto& [site, c] : obs.terms)
        if (shot[static_cast<std::size_t>(site)]) v += c;
    return v;
}

struct ShotEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

/// Sample mean of a diagonal observable over the shots; stderr = sample std / sqrt(n).
[[nodiscard]] inline ShotEstimate estimate_observable(const ShotSet& shots, const DiagonalObservable& obs) {
    const std::size_t n = shots.size();
    if (n == 0) throw ZeroProbabilityError("no shots to average" +
                                               (shots.sector.empty() ? std::string() : " in sector " + shots.sector),
                                           0.0);
    if (n < 2) throw ConfigError("estimating an observable needs at least two shots");
    detail::check_sites(obs, shots.length());
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = evaluate(obs, shots.shot(i));
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, (sum2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
    return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

/// One-point profile with per-point standard errors (open chains).
[[nodiscard]] inline CorrelatorSeries estimate_profile(const ShotSet& shots, const std::vector<DiagonalObservable>& obs) {
    if (shots.geometry.periodic())
        throw ConfigError("one-point profiles are flat on periodic chains; use an open chain or a two-point correlator");
    CorrelatorSeries out;
    out.meta = SeriesMeta{obs.empty() ? std::string("?") : obs.front().label, shots.length(), shots.geometry.boundary,
                          shots.sector, "profile", "raw"};
    for (const auto& o : obs) {
        const auto e = estimate_observable(shots, o);
        out.points.push_back({o.center.value(), e.value, e.stderr_});
    }
    std::stable_sort(out.points.begin(), out.points.end(),
                     [](const auto& a, const auto& b) { return a.separation < b.separation; });
    return out;
}

/**
 * <AB> - <A><B> from shot moments. Pairs at the same separation are averaged
 * before the delete-one jackknife, so each point's error accounts for the
 * correlation between those pairs.
 */
[[nodiscard]] inline CorrelatorSeries estimate_connected(const ShotSet& shots, const std::vector<DiagonalObservable>& obs,
                                                         const std::vector<ObservablePair>& pairs,
                                                         std::size_t min_shots = kMinRetainedShots) {
    const std::size_t n = shots.size();
    if (n < std::max<std::size_t>(min_shots, 2))
        throw ZeroProbabilityError("only " + std::to_string(n) + " shots retained, need at least " +
                                       std::to_string(std::max<std::size_t>(min_shots, 2)),
                                   shots.retention());
    const auto& g = shots.geometry;
    // Group the usable pairs by separation.
    std::map<long long, std::vector<ObservablePair>> groups;
    std::map<long long, double> group_sep;
    for (const auto& [a, b] : pairs) {
        if (a >= obs.size() || b >= obs.size()) throw ConfigError("observable pair index out of range");
        if (obs[a].overlaps(obs[b])) continue;
        detail::check_sites(obs[a], g.length);
        detail::check_sites(obs[b], g.length);
        const double d = raw_separation(obs[a].center, obs[b].center, g);
        const auto key = std::llround(d * 1e6);
        groups[key].emplace_back(a, b);
        group_sep[key] = d;
    }
    std::vector<long long> keys;
    for (const auto& [k, v] : groups) keys.push_back(k);

    CorrelatorSeries out;
    out.meta = SeriesMeta{obs.empty() ? std::string("?") : obs.front().label, g.length, g.boundary, shots.sector,
                          "connected", "raw"};
    out.points.resize(keys.size());
    const double nn = static_cast<double>(n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t gi = 0; gi < static_cast<std::int64_t>(keys.size()); ++gi) {
        const auto& members = groups.at(keys[static_cast<std::size_t>(gi)]);
        const std::size_t m = members.size();
        std::vector<double> sa(m, 0.0), sb(m, 0.0), sab(m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = shots.shot(i);
            for (std::size_t q = 0; q < m; ++q) {
                const double a = evaluate(obs[members[q].first], s);
                const double b = evaluate(obs[members[q].second], s);
                sa[q] += a;
                sb[q] += b;
                sab[q] += a * b;
            }
        }
        double full = 0.0;
        for (std::size_t q = 0; q < m; ++q) full += sab[q] / nn - (sa[q] / nn) * (sb[q] / nn);
        full /= static_cast<double>(m);
        // Delete-one jackknife of the group average.
        double jsum = 0.0, jsum2 = 0.0;
        const double n1 = nn - 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = shots.shot(i);
            double c = 0.0;
            for (std::size_t q = 0; q < m; ++q) {
                const double a = evaluate(obs[members[q].first], s);
                const double b = evaluate(obs[members[q].second], s);
                c += (sab[q] - a * b) / n1 - ((sa[q] - a) / n1) * ((sb[q] - b) / n1);
            }
            c /= static_cast<double>(m);
            jsum += c;
            jsum2 += c * c;
        }
        const double jmean = jsum / nn;
        const double jvar = std::max(0.0, jsum2 / nn - jmean * jmean);
        out.points[static_cast<std::size_t>(gi)] =
            SeriesPoint{group_sep.at(keys[static_cast<std::size_t>(gi)]), full, std::sqrt(n1 * jvar)};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files

[[nodiscard]] inline nlohmann::json sidecar_json(const ShotSet& s) {
    nlohmann::json j{{"L", s.length()},
                     {"boundary", std::string(to_string(s.geometry.boundary))},
                     {"constraint", std::string(to_string(s.geometry.mode))},
                     {"seed", s.seed},
                     {"state_id", s.source},
                     {"n_shots", s.size()},
                     {"parent_count", s.parent_count}};
    if (!s.sector.empty()) j["sector"] = s.sector;
    return j;
}

inline void write_shots(std::ostream& os, const ShotSet& s) {
    for (std::size_t i = 0; i < s.size(); ++i) os << s.shot_string(i) << '\n';
}

/// Read shot lines; the sidecar supplies geometry and provenance.
[[nodiscard]] inline ShotSet read_shots(std::istream& shots, const nlohmann::json& sidecar) {
    ShotSet out;
    try {
        out.geometry = ChainGeometry{sidecar.at("L").get<int>(), parse_boundary(sidecar.at("boundary").get<std::string>()),
                                     parse_constraint(sidecar.value("constraint", std::string("hard_blockade")))};
        out.seed = sidecar.value("seed", std::uint64_t{0});
        out.source = sidecar.value("state_id", std::string());
        out.sector = sidecar.value("sector", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("shot sidecar: ") + e.what());
    }
    out.geometry.validate();
    const auto L = static_cast<std::size_t>(out.geometry.length);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(shots, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.size() != L)
            throw ConfigError("shot line " + std::to_string(lineno) + " has " + std::to_string(line.size()) +
                              " characters, expected " + std::to_string(L));
        for (const char c : line) {
            if (c != '0' && c != '1')
                throw ConfigError("shot line " + std::to_string(lineno) + " contains '" + std::string(1, c) + "'");
            out.bits.push_back(c == '1' ? 1 : 0);
        }
    }
    out.parent_count = sidecar.value("parent_count", out.size());
    return out;
}

} // namespace rydcrit
