// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file lattice_basis.hpp
 * @brief Blockade-constrained occupation basis of a Rydberg chain.
 *
 * Configurations are bitmasks (bit j <-> site j). The basis is ordered
 * lexicographically by the occupation string n_0 n_1 ... n_{L-1}, so site 0
 * is the most significant position and index 0 is always the vacuum. A
 * useful consequence: all configurations sharing a prefix n_0..n_j occupy a
 * contiguous index range, which the samplers rely on.
 */

#pragma once

#include <rydcrit/errors.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rydcrit {

using Config = std::uint64_t;

enum class Boundary { periodic, open };
enum class ConstraintMode { hard_blockade, penalty };

[[nodiscard]] inline std::string_view to_string(Boundary b) noexcept {
    return b == Boundary::periodic ? "periodic" : "open";
}
[[nodiscard]] inline std::string_view to_string(ConstraintMode m) noexcept {
    return m == ConstraintMode::hard_blockade ? "hard" : "penalty";
}

inline Boundary parse_boundary(std::string_view s) {
    if (s == "periodic" || s == "pbc") return Boundary::periodic;
    if (s == "open" || s == "obc") return Boundary::open;
    throw ConfigError("unknown boundary '" + std::string(s) + "' (expected periodic|open)");
}
inline ConstraintMode parse_constraint(std::string_view s) {
    if (s == "hard" || s == "hard-blockade" || s == "hard_blockade") return ConstraintMode::hard_blockade;
    if (s == "penalty") return ConstraintMode::penalty;
    throw ConfigError("unknown constraint mode '" + std::string(s) + "' (expected hard|penalty)");
}

/// Largest chain handled by the bitmask representation.
inline constexpr int kMaxBitmaskLength = 62;
/// Longest chain accepted at all (matrix-product states are not bitmask limited).
inline constexpr int kMaxChainLength = 1 << 16;
/// Penalty mode enumerates the full 2^L space.
inline constexpr int kMaxPenaltyLength = 20;

struct ChainGeometry {
    int length = 2;
    Boundary boundary = Boundary::periodic;
    ConstraintMode mode = ConstraintMode::hard_blockade;

    [[nodiscard]] bool periodic() const noexcept { return boundary == Boundary::periodic; }
    [[nodiscard]] bool hard() const noexcept { return mode == ConstraintMode::hard_blockade; }

    /// Site index reduced onto the ring; only meaningful for periodic chains.
    [[nodiscard]] int wrap(long site) const noexcept {
        const long m = site % length;
        return static_cast<int>(m < 0 ? m + length : m);
    }

    void validate() const {
        if (length < 2) throw ConfigError("chain length must be >= 2, got " + std::to_string(length));
        if (length > kMaxChainLength)
            throw CapacityError("chain length " + std::to_string(length) + " exceeds " +
                                std::to_string(kMaxChainLength));
    }

    /// Configurations of this chain fit in a Config bitmask.
    [[nodiscard]] bool fits_bitmask() const noexcept { return length <= kMaxBitmaskLength; }

    void validate_bitmask() const {
        validate();
        if (!fits_bitmask())
            throw CapacityError("chain length " + std::to_string(length) +
                                " exceeds bitmask width " + std::to_string(kMaxBitmaskLength));
    }

    friend bool operator==(const ChainGeometry&, const ChainGeometry&) = default;
};

[[nodiscard]] constexpr bool occupied(Config c, int site) noexcept { return (c >> site) & 1u; }

/// True if no two neighbouring sites (including the wrap bond when periodic) are excited.
[[nodiscard]] inline bool is_blockaded(Config c, int length, Boundary boundary) noexcept {
    const Config mask = length >= 64 ? ~Config{0} : ((Config{1} << length) - 1);
    c &= mask;
    if (c & (c >> 1)) return false;
    if (boundary == Boundary::periodic && occupied(c, 0) && occupied(c, length - 1)) return false;
    return true;
}
[[nodiscard]] inline bool is_blockaded(Config c, const ChainGeometry& g) noexcept {
    return is_blockaded(c, g.length, g.boundary);
}

/// F(1) = F(2) = 1.
[[nodiscard]] constexpr std::uint64_t fibonacci(int n) noexcept {
    std::uint64_t a = 0, b = 1;
    for (int i = 0; i < n; ++i) {
        const auto t = a + b;
        a = b;
        b = t;
    }
    return a;
}

/// L(1) = 1, L(2) = 3.
[[nodiscard]] constexpr std::uint64_t lucas(int n) noexcept {
    std::uint64_t a = 2, b = 1;
    for (int i = 0; i < n; ++i) {
        const auto t = a + b;
        a = b;
        b = t;
    }
    return a;
}

/// Dimension of the basis a geometry enumerates (closed forms).
[[nodiscard]] inline std::uint64_t expected_dimension(const ChainGeometry& g) noexcept {
    if (!g.hard()) return std::uint64_t{1} << g.length;
    return g.periodic() ? lucas(g.length) : fibonacci(g.length + 2);
}

/// Occupation string, character j holds n_j.
[[nodiscard]] inline std::string config_to_string(Config c, int length) {
    std::string s(static_cast<std::size_t>(length), '0');
    for (int j = 0; j < length; ++j)
        if (occupied(c, j)) s[static_cast<std::size_t>(j)] = '1';
    return s;
}

[[nodiscard]] inline Config config_from_string(std::string_view s) {
    if (s.size() > static_cast<std::size_t>(kMaxBitmaskLength))
        throw CapacityError("configuration string longer than bitmask width");
    Config c = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == '1') c |= Config{1} << j;
        else if (s[j] != '0') throw ConfigError("configuration string must contain only 0/1");
    }
    return c;
}

/// Lexicographic sort key: site 0 becomes the most significant bit.
[[nodiscard]] constexpr std::uint64_t lexicographic_key(Config c, int length) noexcept {
    std::uint64_t k = 0;
    for (int j = 0; j < length; ++j) k = (k << 1) | ((c >> j) & 1u);
    return k;
}

struct BasisOptions {
    std::uint64_t max_dimension = std::uint64_t{1} << 25;
};

class BlockadedBasis {
public:
    BlockadedBasis() = default;

    [[nodiscard]] const ChainGeometry& geometry() const noexcept { return geometry_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return configs_.size(); }
    [[nodiscard]] int length() const noexcept { return geometry_.length; }
    [[nodiscard]] std::span<const Config> configs() const noexcept { return configs_; }
    [[nodiscard]] std::span<const std::uint64_t> keys() const noexcept { return keys_; }

    [[nodiscard]] bool admits(Config c) const noexcept {
        const int L = geometry_.length;
        if (L < 64 && (c >> L) != 0) return false;
        return !geometry_.hard() || is_blockaded(c, geometry_);
    }

    /// Index of `c`, or nullopt when it is not part of the basis.
    [[nodiscard]] std::optional<std::size_t> find(Config c) const noexcept {
        if (!admits(c)) return std::nullopt;
        const auto key = lexicographic_key(c, geometry_.length);
        const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
        if (it == keys_.end() || *it != key) return std::nullopt;
        return static_cast<std::size_t>(it - keys_.begin());
    }

    [[nodiscard]] std::size_t index_of(Config c) const {
        if (!admits(c))
            throw ConstraintError("configuration " + config_to_string(c, geometry_.length) +
                                  " violates the basis constraint");
        return *find(c);
    }

    [[nodiscard]] Config config_of(std::size_t index) const {
        if (index >= configs_.size())
            throw ConfigError("basis index " + std::to_string(index) + " out of range [0, " +
                              std::to_string(configs_.size()) + ")");
        return configs_[index];
    }

    /// One L-character 0/1 string per line, in index order.
    void dump(std::ostream& os) const {
        for (const Config c : configs_) os << config_to_string(c, geometry_.length) << '\n';
    }

    friend BlockadedBasis enumerate_basis(const ChainGeometry& geometry, const BasisOptions& opts);

private:
    ChainGeometry geometry_{};
    std::vector<Config> configs_;
    std::vector<std::uint64_t> keys_;
};

/**
 * Enumerate every admissible configuration in lexicographic order.
 *
 * Hard-blockade mode yields Fibonacci(L+2) (open) or Lucas(L) (periodic)
 * states; penalty mode yields all 2^L bitstrings and is limited to short
 * chains.
 */
[[nodiscard]] inline BlockadedBasis enumerate_basis(const ChainGeometry& geometry,
                                                    const BasisOptions& opts = {}) {
    geometry.validate_bitmask();
    if (!geometry.hard() && geometry.length > kMaxPenaltyLength)
        throw CapacityError("penalty-mode basis limited to L <= " + std::to_string(kMaxPenaltyLength));
    const auto expected = expected_dimension(geometry);
    if (expected > opts.max_dimension)
        throw CapacityError("basis dimension " + std::to_string(expected) +
                            " exceeds the configured budget " + std::to_string(opts.max_dimension));

    BlockadedBasis basis;
    basis.geometry_ = geometry;
    basis.configs_.reserve(expected);
    const int L = geometry.length;

    // Depth-first over sites 0..L-1, trying n_j = 0 before n_j = 1.
    std::vector<int> choice(static_cast<std::size_t>(L), -1);
    Config c = 0;
    int site = 0;
    while (site >= 0) {
        auto& ch = choice[static_cast<std::size_t>(site)];
        ++ch;
        if (ch > 1) {
            ch = -1;
            c &= ~(Config{1} << site);
            --site;
            continue;
        }
        if (ch == 1) {
            if (geometry.hard()) {
                const bool left_busy = site > 0 && occupied(c, site - 1);
                const bool wrap_busy = geometry.periodic() && site == L - 1 && L > 1 && occupied(c, 0);
                if (left_busy || wrap_busy) continue;
            }
            c |= Config{1} << site;
        } else {
            c &= ~(Config{1} << site);
        }
        if (site == L - 1) {
            basis.configs_.push_back(c);
        } else {
            ++site;
        }
    }

    basis.keys_.reserve(basis.configs_.size());
    for (const Config cfg : basis.configs_) basis.keys_.push_back(lexicographic_key(cfg, L));
    return basis;
}

} // namespace rydcrit
