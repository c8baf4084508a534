// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file measurement.hpp
 * @brief Projective, weak and generalized measurements with post-selection.
 *
 * All operations act on occupation-diagonal weights, so on a dense state
 * they reduce to masking or reweighting amplitudes. A weak measurement with
 * outcomes n multiplies each amplitude by
 *
 *   exp(-(beta/2) sum_a (-1)^{n_a} n_{i_a}(c)),
 *
 * which tends to the projector onto the sector as beta grows. Probabilities
 * below kZeroProbability are treated as an empty sector.
 */

#pragma once

#include <rydcrit/dense_state.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/pattern.hpp>

#include <Eigen/Core>

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace rydcrit {

inline constexpr double kZeroProbability = 1e-14;

/// Largest number of measured sites for full outcome enumeration.
inline constexpr int kMaxEnumeratedSites = 20;

enum class MeasurementKind { projective, weak, generalized };

struct MeasurementSpec {
    MeasurementKind kind = MeasurementKind::projective;
    double beta = 0.0;
    double theta = 0.0;

    void validate() const {
        if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("measurement strength beta must be >= 0");
        if (kind == MeasurementKind::generalized && !(theta >= 0.0 && theta <= 0.5 * std::numbers::pi + 1e-12))
            throw ConfigError("generalized measurement angle must lie in [0, pi/2]");
    }
};

[[nodiscard]] inline std::string_view to_string(MeasurementKind k) noexcept {
    switch (k) {
        case MeasurementKind::projective: return "projective";
        case MeasurementKind::weak: return "weak";
        case MeasurementKind::generalized: return "generalized";
    }
    return "projective";
}

inline MeasurementKind parse_measurement_kind(std::string_view s) {
    if (s == "projective") return MeasurementKind::projective;
    if (s == "weak") return MeasurementKind::weak;
    if (s == "generalized") return MeasurementKind::generalized;
    throw ConfigError("unknown measurement kind '" + std::string(s) + "' (expected projective|weak|generalized)");
}

struct Projection {
    DenseState state;
    double probability = 0.0;
};

struct ConditionalProbabilities {
    std::vector<double> values;
    /// Set when the prefix ending just before this entry had zero probability;
    /// `values` then stops at that point.
    std::optional<std::size_t> zero_prefix_at;
};

namespace detail {

inline void check_sector_geometry(const ChainGeometry& state, const OutcomeSector& sector) {
    if (!(state == sector.geometry))
        throw ConfigError("sector was expanded for a different chain (L=" + std::to_string(sector.geometry.length) +
                          ", state L=" + std::to_string(state.length) + ")");
}

/// Multiply amplitudes by exp(exponent(c)) with the largest exponent shifted to
/// zero, then renormalise.
template <class Exponent>
DenseState reweight(const DenseState& in, Exponent&& exponent) {
    const auto configs = in.basis->configs();
    const auto n = in.amplitudes.size();
    Eigen::VectorXd e(n);
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        e[i] = exponent(configs[static_cast<std::size_t>(i)]);
        if (in.amplitudes[i] != 0.0) top = std::max(top, e[i]);
    }
    DenseState out{in.basis, Eigen::VectorXd(n)};
    if (!std::isfinite(top)) throw ZeroProbabilityError("measurement applied to a zero state", 0.0);
    for (Eigen::Index i = 0; i < n; ++i) out.amplitudes[i] = in.amplitudes[i] * std::exp(e[i] - top);
    const double norm = out.amplitudes.norm();
    if (!(norm > 1e-150)) throw ZeroProbabilityError("post-measurement norm underflow", norm * norm);
    out.amplitudes /= norm;
    return out;
}

} // namespace detail

/// Born weight of the sector.
[[nodiscard]] inline double sector_probability(const DenseState& state, const OutcomeSector& sector) {
    detail::check_sector_geometry(state.geometry(), sector);
    const auto configs = state.basis->configs();
    double p = 0.0;
    for (std::size_t i = 0; i < configs.size(); ++i)
        if (sector.matches(configs[i])) p += state.amplitudes[static_cast<Eigen::Index>(i)] * state.amplitudes[static_cast<Eigen::Index>(i)];
    return p;
}

/// Renormalised projection onto the sector, with its Born probability.
[[nodiscard]] inline Projection project(const DenseState& state, const OutcomeSector& sector) {
    detail::check_sector_geometry(state.geometry(), sector);
    const auto configs = state.basis->configs();
    Projection out{DenseState{state.basis, Eigen::VectorXd::Zero(state.amplitudes.size())}, 0.0};
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!sector.matches(configs[i])) continue;
        const double a = state.amplitudes[static_cast<Eigen::Index>(i)];
        out.state.amplitudes[static_cast<Eigen::Index>(i)] = a;
        out.probability += a * a;
    }
    if (out.probability < kZeroProbability)
        throw ZeroProbabilityError("sector '" + sector.pattern + "' has probability " +
                                       std::to_string(out.probability),
                                   out.probability);
    out.state.amplitudes /= std::sqrt(out.probability);
    return out;
}

[[nodiscard]] inline DenseState weak_measure(const DenseState& state, const OutcomeSector& sector, double beta) {
    detail::check_sector_geometry(state.geometry(), sector);
    if (!(beta >= 0.0)) throw ConfigError("weak measurement needs beta >= 0");
    if (beta == 0.0) return state;
    // Outcome 0 penalises occupation, outcome 1 rewards it.
    const Config zeros = sector.measured_mask & ~sector.outcome_mask;
    const Config ones = sector.outcome_mask;
    return detail::reweight(state, [&](Config c) {
        return -0.5 * beta * (std::popcount(c & zeros) - std::popcount(c & ones));
    });
}

/// exp(-(beta/2) sum_j [(-1)^j sin(theta) + cos(theta)] n_j), periodic even chains only.
[[nodiscard]] inline DenseState generalized_measure(const DenseState& state, double beta, double theta) {
    const auto& g = state.geometry();
    if (!g.periodic() || g.length % 2 != 0)
        throw ConfigError("generalized measurement is defined on periodic even-length chains");
    if (!(beta >= 0.0)) throw ConfigError("generalized measurement needs beta >= 0");
    if (beta == 0.0) return state;
    Config even = 0;
    for (int j = 0; j < g.length; j += 2) even |= Config{1} << j;
    const double s = std::sin(theta), co = std::cos(theta);
    return detail::reweight(state, [&](Config c) {
        const int ne = std::popcount(c & even);
        const int no = std::popcount(c & ~even);
        return -0.5 * beta * ((s + co) * ne + (co - s) * no);
    });
}

[[nodiscard]] inline DenseState apply_measurement(const DenseState& state, const OutcomeSector* sector,
                                                  const MeasurementSpec& spec, double* probability = nullptr) {
    spec.validate();
    switch (spec.kind) {
        case MeasurementKind::projective: {
            if (sector == nullptr) throw ConfigError("projective measurement needs a pattern");
            auto p = project(state, *sector);
            if (probability) *probability = p.probability;
            return std::move(p.state);
        }
        case MeasurementKind::weak:
            if (sector == nullptr) throw ConfigError("weak measurement needs a pattern");
            if (probability) *probability = std::numeric_limits<double>::quiet_NaN();
            return weak_measure(state, *sector, spec.beta);
        case MeasurementKind::generalized:
            if (probability) *probability = std::numeric_limits<double>::quiet_NaN();
            return generalized_measure(state, spec.beta, spec.theta);
    }
    return state;
}

/**
 * P(n_{i_k} | n_{i_1} .. n_{i_{k-1}}) for k = 1..K, sites in ascending order.
 */
[[nodiscard]] inline ConditionalProbabilities conditional_probabilities(const DenseState& state,
                                                                        const OutcomeSector& sector) {
    detail::check_sector_geometry(state.geometry(), sector);
    const auto configs = state.basis->configs();
    const std::size_t K = sector.sites.size();
    // prefix[k] = P(first k outcomes), accumulated in one pass.
    std::vector<double> prefix(K + 1, 0.0);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const double w = state.amplitudes[static_cast<Eigen::Index>(i)] * state.amplitudes[static_cast<Eigen::Index>(i)];
        prefix[0] += w;
        for (std::size_t k = 0; k < K; ++k) {
            if (static_cast<int>(occupied(configs[i], sector.sites[k])) != sector.outcomes[k]) break;
            prefix[k + 1] += w;
        }
    }
    ConditionalProbabilities out;
    for (std::size_t k = 0; k < K; ++k) {
        if (prefix[k] < kZeroProbability) {
            out.zero_prefix_at = k;
            break;
        }
        out.values.push_back(prefix[k + 1] / prefix[k]);
    }
    return out;
}

/// Born weight of every outcome string on `sites`; bit a of the index is the outcome at sites[a].
[[nodiscard]] inline std::vector<double> enumerate_sector_probabilities(const DenseState& state,
                                                                       const std::vector<int>& sites) {
    if (sites.size() > static_cast<std::size_t>(kMaxEnumeratedSites))
        throw CapacityError("outcome enumeration limited to " + std::to_string(kMaxEnumeratedSites) + " sites");
    for (const int s : sites)
        if (s < 0 || s >= state.length()) throw ConfigError("measured site out of range");
    std::vector<double> probs(std::size_t{1} << sites.size(), 0.0);
    const auto configs = state.basis->configs();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        std::size_t key = 0;
        for (std::size_t a = 0; a < sites.size(); ++a)
            key |= static_cast<std::size_t>(occupied(configs[i], sites[a])) << a;
        probs[key] += state.amplitudes[static_cast<Eigen::Index>(i)] * state.amplitudes[static_cast<Eigen::Index>(i)];
    }
    return probs;
}

} // namespace rydcrit
