// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file pattern.hpp
 * @brief Measurement-pattern language and its expansion into outcome sectors.
 *
 * Grammar (whitespace is allowed between tokens):
 *
 *   pattern := clause ("," clause)*
 *   clause  := "n[" INT "j" ("+" INT)? "]=" ("0" | "1")
 *
 * A clause `n[s j + r]=b` selects every site congruent to r modulo s and
 * fixes its outcome to b. Sites are 0-based, so `n[2j]=0` measures sites
 * 0, 2, 4, ... The pattern period is the lcm of the strides.
 */

#pragma once

#include <rydcrit/errors.hpp>
#include <rydcrit/lattice_basis.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rydcrit {

struct PatternClause {
    int stride = 1;
    int offset = 0;
    int outcome = 0;

    friend bool operator==(const PatternClause&, const PatternClause&) = default;
};

/// Largest pattern period accepted by the parser.
inline constexpr int kMaxPatternPeriod = 1 << 16;

class MeasurementPattern {
public:
    MeasurementPattern() = default;
    MeasurementPattern(std::vector<PatternClause> clauses, std::string source)
        : clauses_(std::move(clauses)), source_(std::move(source)) {
        period_ = 1;
        for (const auto& c : clauses_) {
            period_ = std::lcm(period_, c.stride);
            if (period_ > kMaxPatternPeriod) throw ConfigError("pattern period exceeds " + std::to_string(kMaxPatternPeriod));
        }
        residues_.assign(static_cast<std::size_t>(period_), -1);
        for (const auto& c : clauses_) {
            for (int r = c.offset; r < period_; r += c.stride) {
                auto& slot = residues_[static_cast<std::size_t>(r)];
                if (slot >= 0 && slot != c.outcome)
                    throw ConfigError("conflicting clauses: residue " + std::to_string(r) + " mod " +
                                      std::to_string(period_) + " assigned both 0 and 1");
                slot = c.outcome;
            }
        }
    }

    [[nodiscard]] const std::vector<PatternClause>& clauses() const noexcept { return clauses_; }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] int period() const noexcept { return period_; }

    /// Outcome forced on residue r modulo the period, or -1 when unmeasured.
    [[nodiscard]] const std::vector<int>& residues() const noexcept { return residues_; }

    /// Canonical text, e.g. "n[3j]=0,n[3j+1]=0".
    [[nodiscard]] std::string canonical() const {
        std::string out;
        for (const auto& c : clauses_) {
            if (!out.empty()) out += ',';
            out += "n[" + std::to_string(c.stride) + "j";
            if (c.offset != 0) out += "+" + std::to_string(c.offset);
            out += "]=" + std::to_string(c.outcome);
        }
        return out;
    }

private:
    std::vector<PatternClause> clauses_;
    std::string source_;
    int period_ = 1;
    std::vector<int> residues_{-1};
};

namespace detail {

class PatternLexer {
public:
    explicit PatternLexer(std::string_view text) : text_(text) {}

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    [[nodiscard]] bool done() {
        skip_space();
        return pos_ >= text_.size();
    }
    [[nodiscard]] std::size_t pos() const noexcept { return pos_; }

    void expect(std::string_view token) {
        skip_space();
        if (text_.substr(pos_, token.size()) != token)
            throw ParseError("expected '" + std::string(token) + "'", pos_);
        pos_ += token.size();
    }
    bool accept(char ch) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ch) {
            ++pos_;
            return true;
        }
        return false;
    }
    int integer() {
        skip_space();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            value = value * 10 + (text_[pos_] - '0');
            if (value > kMaxPatternPeriod) throw ParseError("integer too large", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError("expected an integer", start);
        return static_cast<int>(value);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

[[nodiscard]] inline MeasurementPattern parse_pattern(std::string_view text) {
    detail::PatternLexer lex(text);
    std::vector<PatternClause> clauses;
    if (lex.done()) throw ParseError("empty pattern", 0);
    do {
        PatternClause c;
        lex.expect("n[");
        const std::size_t stride_at = (lex.skip_space(), lex.pos());
        c.stride = lex.integer();
        if (c.stride < 1) throw ParseError("stride must be positive", stride_at);
        lex.expect("j");
        if (lex.accept('+')) {
            const std::size_t off_at = (lex.skip_space(), lex.pos());
            c.offset = lex.integer();
            if (c.offset >= c.stride)
                throw ParseError("offset " + std::to_string(c.offset) + " must be smaller than stride " +
                                     std::to_string(c.stride),
                                 off_at);
        }
        lex.expect("]");
        lex.expect("=");
        lex.skip_space();
        const std::size_t out_at = lex.pos();
        if (lex.accept('0')) c.outcome = 0;
        else if (lex.accept('1')) c.outcome = 1;
        else throw ParseError("expected outcome 0 or 1", out_at);
        clauses.push_back(c);
    } while (lex.accept(','));
    if (!lex.done()) throw ParseError("unexpected trailing input", lex.pos());
    return MeasurementPattern(std::move(clauses), std::string(text));
}

/// Concrete measured sites and outcomes of a pattern on a given chain.
struct OutcomeSector {
    ChainGeometry geometry;
    std::string pattern;             ///< canonical pattern text
    int period = 1;                  ///< p, the unit-cell length
    std::vector<int> residues;       ///< outcome per residue mod p, -1 if unmeasured
    std::vector<int> sites;          ///< measured sites, ascending
    std::vector<int> outcomes;       ///< outcome for each entry of `sites`
    std::vector<int> site_outcome;   ///< per site: outcome, or -1 when unmeasured
    Config measured_mask = 0;        ///< bitmask forms, filled only when the chain fits a Config
    Config outcome_mask = 0;
    int minimal_period = 1;          ///< smallest translation leaving the residue table invariant
    bool preserves_bond_reflection = false;

    [[nodiscard]] std::size_t size() const noexcept { return sites.size(); }
    [[nodiscard]] double density() const noexcept {
        return static_cast<double>(sites.size()) / static_cast<double>(geometry.length);
    }
    [[nodiscard]] bool measured(int site) const noexcept { return site_outcome[static_cast<std::size_t>(site)] >= 0; }
    [[nodiscard]] bool matches(Config c) const noexcept { return (c & measured_mask) == outcome_mask; }

    /// The Z2 preserving translation (T_x)^p with odd p, in terms of the minimal period.
    [[nodiscard]] bool preserves_odd_translation() const noexcept { return minimal_period % 2 == 1; }
};

enum class SigmaClass { sigma_allowed, sigma_forbidden };

[[nodiscard]] inline std::string_view to_string(SigmaClass c) noexcept {
    return c == SigmaClass::sigma_allowed ? "sigma_allowed" : "sigma_forbidden";
}

namespace detail {

inline void fill_masks(OutcomeSector& s) {
    if (!s.geometry.fits_bitmask()) return;
    for (std::size_t a = 0; a < s.sites.size(); ++a) {
        s.measured_mask |= Config{1} << s.sites[a];
        if (s.outcomes[a] == 1) s.outcome_mask |= Config{1} << s.sites[a];
    }
}

inline int minimal_residue_period(const std::vector<int>& residues) {
    const int p = static_cast<int>(residues.size());
    for (int d = 1; d <= p; ++d) {
        if (p % d != 0) continue;
        bool ok = true;
        for (int r = 0; r < p && ok; ++r) ok = residues[static_cast<std::size_t>(r)] == residues[static_cast<std::size_t>((r + d) % p)];
        if (ok) return d;
    }
    return p;
}

/// Whether j -> 2c - 1 - j maps the periodic pattern onto itself for some bond centre c.
inline bool residue_bond_reflection(const std::vector<int>& residues) {
    const int p = static_cast<int>(residues.size());
    for (int c = 0; c < p; ++c) {
        bool ok = true;
        for (int r = 0; r < p && ok; ++r) {
            const int image = (((2 * c - 1 - r) % p) + p) % p;
            ok = residues[static_cast<std::size_t>(r)] == residues[static_cast<std::size_t>(image)];
        }
        if (ok) return true;
    }
    return false;
}

} // namespace detail

/**
 * Expand a pattern on a chain.
 *
 * Periodic chains need p | L. Patterns that force excitations on two
 * neighbouring sites are rejected since such sectors are empty under the
 * blockade.
 */
[[nodiscard]] inline OutcomeSector expand_pattern(const MeasurementPattern& pattern, const ChainGeometry& geometry) {
    geometry.validate();
    const int L = geometry.length;
    const int p = pattern.period();
    if (geometry.periodic() && L % p != 0)
        throw ConfigError("pattern period " + std::to_string(p) + " does not divide periodic length " +
                          std::to_string(L));
    OutcomeSector s;
    s.geometry = geometry;
    s.pattern = pattern.canonical();
    s.period = p;
    s.residues = pattern.residues();
    s.site_outcome.assign(static_cast<std::size_t>(L), -1);
    for (int j = 0; j < L; ++j) {
        const int o = s.residues[static_cast<std::size_t>(j % p)];
        if (o < 0) continue;
        s.sites.push_back(j);
        s.outcomes.push_back(o);
        s.site_outcome[static_cast<std::size_t>(j)] = o;
    }
    detail::fill_masks(s);
    for (int j = 0; j < L; ++j) {
        const int k = j + 1 < L ? j + 1 : (geometry.periodic() ? 0 : -1);
        if (k >= 0 && k != j && s.site_outcome[static_cast<std::size_t>(j)] == 1 &&
            s.site_outcome[static_cast<std::size_t>(k)] == 1)
            throw ConfigError("pattern '" + s.pattern + "' forces excitations on neighbouring sites");
    }
    s.minimal_period = detail::minimal_residue_period(s.residues);
    s.preserves_bond_reflection = detail::residue_bond_reflection(s.residues);
    return s;
}

[[nodiscard]] inline OutcomeSector expand_pattern(std::string_view text, const ChainGeometry& geometry) {
    return expand_pattern(parse_pattern(text), geometry);
}

/// Explicit site list with per-site outcomes (no periodic structure assumed).
[[nodiscard]] inline OutcomeSector make_sector(const ChainGeometry& geometry, std::vector<int> sites,
                                               std::vector<int> outcomes) {
    geometry.validate();
    if (sites.size() != outcomes.size()) throw ConfigError("sites and outcomes differ in length");
    OutcomeSector s;
    s.geometry = geometry;
    s.period = geometry.length;
    s.residues.assign(static_cast<std::size_t>(geometry.length), -1);
    s.site_outcome.assign(static_cast<std::size_t>(geometry.length), -1);
    std::vector<std::pair<int, int>> zipped;
    for (std::size_t a = 0; a < sites.size(); ++a) {
        if (sites[a] < 0 || sites[a] >= geometry.length) throw ConfigError("measured site out of range");
        if (outcomes[a] != 0 && outcomes[a] != 1) throw ConfigError("outcomes must be 0 or 1");
        zipped.emplace_back(sites[a], outcomes[a]);
    }
    std::sort(zipped.begin(), zipped.end());
    for (std::size_t a = 0; a < zipped.size(); ++a) {
        const auto [site, o] = zipped[a];
        if (a > 0 && zipped[a - 1].first == site) throw ConfigError("site measured twice");
        s.sites.push_back(site);
        s.outcomes.push_back(o);
        s.residues[static_cast<std::size_t>(site)] = o;
        s.site_outcome[static_cast<std::size_t>(site)] = o;
    }
    detail::fill_masks(s);
    s.minimal_period = detail::minimal_residue_period(s.residues);
    s.preserves_bond_reflection = detail::residue_bond_reflection(s.residues);
    return s;
}

/**
 * sigma is forbidden when the sector keeps a symmetry under which it is odd:
 * a translation by an odd number of sites, or a bond-centred reflection.
 */
[[nodiscard]] inline SigmaClass classify_sector(const OutcomeSector& s) noexcept {
    return (s.preserves_odd_translation() || s.preserves_bond_reflection) ? SigmaClass::sigma_forbidden
                                                                        : SigmaClass::sigma_allowed;
}

} // namespace rydcrit
