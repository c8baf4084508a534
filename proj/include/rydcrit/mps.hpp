// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file mps.hpp
 * @brief Open-boundary matrix-product states with local dimension 2.
 *
 * Site k holds two matrices A[k][n] (n = occupation) of shape
 * left_dim(k) x right_dim(k); the outer bonds have dimension 1. Periodic
 * chains are represented by the same open MPS, only the Hamiltonian wraps.
 *
 * Most measurement routines bring the state into right-canonical form
 * (orthogonality centre on site 0). The right environment of every site is
 * then the identity, so prefix probabilities, Born sampling and occupation
 * moments only need left environments.
 */

#pragma once

#include <rydcrit/binary_io.hpp>
#include <rydcrit/dense_state.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/measurement.hpp>
#include <rydcrit/observables.hpp>
#include <rydcrit/pattern.hpp>

#include <Eigen/Core>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

namespace rydcrit {

class MatrixProductState {
public:
    using SiteTensor = std::array<Eigen::MatrixXd, 2>;

    MatrixProductState() = default;
    MatrixProductState(ChainGeometry g, std::vector<SiteTensor> tensors, int center = -1)
        : geometry_(g), tensors_(std::move(tensors)), center_(center) {
        if (static_cast<int>(tensors_.size()) != g.length) throw ConfigError("MPS has the wrong number of sites");
        for (int k = 0; k < length(); ++k) {
            const auto& t = tensors_[static_cast<std::size_t>(k)];
            if (t[0].rows() != t[1].rows() || t[0].cols() != t[1].cols())
                throw ConfigError("MPS site " + std::to_string(k) + " has mismatched blocks");
            if (k > 0 && t[0].rows() != tensors_[static_cast<std::size_t>(k - 1)][0].cols())
                throw ConfigError("MPS bond " + std::to_string(k) + " has inconsistent dimensions");
        }
        if (tensors_.front()[0].rows() != 1 || tensors_.back()[0].cols() != 1)
            throw ConfigError("MPS outer bonds must have dimension 1");
    }

    [[nodiscard]] const ChainGeometry& geometry() const noexcept { return geometry_; }
    [[nodiscard]] int length() const noexcept { return static_cast<int>(tensors_.size()); }
    [[nodiscard]] const SiteTensor& site(int k) const { return tensors_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] SiteTensor& site(int k) { return tensors_[static_cast<std::size_t>(k)]; }

    /// Orthogonality centre, or -1 when the canonical form is not known.
    [[nodiscard]] int center() const noexcept { return center_; }
    void set_center(int c) noexcept { center_ = c; }
    [[nodiscard]] bool canonical() const noexcept { return center_ >= 0; }

    [[nodiscard]] Eigen::Index left_dim(int k) const { return site(k)[0].rows(); }
    [[nodiscard]] Eigen::Index right_dim(int k) const { return site(k)[0].cols(); }

    /// Dimensions of the L-1 internal bonds.
    [[nodiscard]] std::vector<int> bond_dims() const {
        std::vector<int> d;
        for (int k = 0; k + 1 < length(); ++k) d.push_back(static_cast<int>(right_dim(k)));
        return d;
    }
    [[nodiscard]] int max_bond() const {
        int m = 1;
        for (const int d : bond_dims()) m = std::max(m, d);
        return m;
    }

private:
    ChainGeometry geometry_{};
    std::vector<SiteTensor> tensors_;
    int center_ = -1;
};

/// Bond-dimension-one state with the given occupations (site j <-> occupations[j]).
[[nodiscard]] inline MatrixProductState product_mps(const ChainGeometry& g, const std::vector<int>& occupations) {
    g.validate();
    if (static_cast<int>(occupations.size()) != g.length) throw ConfigError("product MPS needs one occupation per site");
    std::vector<MatrixProductState::SiteTensor> t(occupations.size());
    for (std::size_t j = 0; j < occupations.size(); ++j) {
        t[j][0] = Eigen::MatrixXd::Constant(1, 1, occupations[j] == 0 ? 1.0 : 0.0);
        t[j][1] = Eigen::MatrixXd::Constant(1, 1, occupations[j] == 0 ? 0.0 : 1.0);
    }
    return MatrixProductState(g, std::move(t), 0);
}

[[nodiscard]] inline MatrixProductState product_mps(const ChainGeometry& g, std::string_view bits) {
    std::vector<int> occ;
    for (const char ch : bits) {
        if (ch != '0' && ch != '1') throw ConfigError("product state string must contain only 0 and 1");
        occ.push_back(ch - '0');
    }
    return product_mps(g, occ);
}

namespace detail {

/// Gaussian entries from a seeded generator; bond dimensions capped by the exact Schmidt rank.
inline MatrixProductState random_mps_raw(const ChainGeometry& g, int chi, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    const int L = g.length;
    std::vector<Eigen::Index> dims(static_cast<std::size_t>(L + 1), 1);
    for (int b = 1; b < L; ++b) {
        const int to_edge = std::min(b, L - b);
        const long exact = to_edge >= 30 ? (1L << 30) : (1L << to_edge);
        dims[static_cast<std::size_t>(b)] = static_cast<Eigen::Index>(std::min<long>(chi, exact));
    }
    std::vector<MatrixProductState::SiteTensor> t(static_cast<std::size_t>(L));
    for (int k = 0; k < L; ++k)
        for (int n = 0; n < 2; ++n) {
            auto& m = t[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
            m.resize(dims[static_cast<std::size_t>(k)], dims[static_cast<std::size_t>(k + 1)]);
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(gen);
        }
    return MatrixProductState(g, std::move(t), -1);
}

/**
 * Random state supported on blockaded configurations only. Each bond carries
 * a Gaussian index times two flags: the occupation of the last site to the
 * left and, on rings, the occupation of site 0.
 */
inline MatrixProductState random_blockaded_mps(const ChainGeometry& g, int chi, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    const int L = g.length;
    const int flags = g.periodic() ? 4 : 2;
    const int m = std::max(1, chi / flags);
    auto bond_rank = [&](int b) -> int {
        if (b == 0 || b == L) return 1;
        const int to_edge = std::min(b, L - b);
        return to_edge >= 20 ? m : std::min(m, 1 << to_edge);
    };
    std::vector<MatrixProductState::SiteTensor> t(static_cast<std::size_t>(L));
    for (int k = 0; k < L; ++k) {
        const int ml = bond_rank(k), mr = bond_rank(k + 1);
        const int rows = k == 0 ? 1 : ml * flags;
        const int cols = k == L - 1 ? 1 : mr * flags;
        for (int n = 0; n < 2; ++n) {
            auto& M = t[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
            M = Eigen::MatrixXd::Zero(rows, cols);
            for (int a = 0; a < (k == 0 ? 1 : ml); ++a)
                for (int fl = 0; fl < (k == 0 ? 1 : 2); ++fl)
                    for (int ff = 0; ff < (k == 0 || !g.periodic() ? 1 : 2); ++ff) {
                        if (fl == 1 && n == 1) continue;
                        const int first = k == 0 ? n : ff;
                        if (k == L - 1) {
                            if (g.periodic() && first == 1 && n == 1 && L > 1) continue;
                            M((a * 2 + fl) * (flags / 2) + ff, 0) = normal(gen);
                            continue;
                        }
                        for (int b = 0; b < mr; ++b)
                            M((a * 2 + fl) * (flags / 2) + ff, (b * 2 + n) * (flags / 2) + (g.periodic() ? first : 0)) =
                                normal(gen);
                    }
        }
    }
    return MatrixProductState(g, std::move(t), -1);
}

/// Stack [A0; A1] (rows = (n, left), cols = right).
inline Eigen::MatrixXd stack_rows(const MatrixProductState::SiteTensor& t) {
    Eigen::MatrixXd m(2 * t[0].rows(), t[0].cols());
    m << t[0], t[1];
    return m;
}

/// [A0, A1] (rows = left, cols = (n, right)).
inline Eigen::MatrixXd stack_cols(const MatrixProductState::SiteTensor& t) {
    Eigen::MatrixXd m(t[0].rows(), 2 * t[0].cols());
    m << t[0], t[1];
    return m;
}

/// Left-normalise site k by QR and push the remainder into site k+1.
inline void left_orthonormalize(MatrixProductState& psi, int k) {
    auto& t = psi.site(k);
    const Eigen::MatrixXd m = stack_rows(t);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::Index r = std::min(m.rows(), m.cols());
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), r);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    const Eigen::Index l = t[0].rows();
    t[0] = Q.topRows(l);
    t[1] = Q.bottomRows(l);
    if (k + 1 < psi.length()) {
        auto& next = psi.site(k + 1);
        next[0] = R * next[0];
        next[1] = R * next[1];
    } else {
        // Last site: R is the 1x1 norm; keep it on the site.
        t[0] *= R(0, 0);
        t[1] *= R(0, 0);
    }
}

/// Right-normalise site k by an LQ decomposition and push the remainder into site k-1.
inline void right_orthonormalize(MatrixProductState& psi, int k) {
    auto& t = psi.site(k);
    const Eigen::MatrixXd m = stack_cols(t);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m.transpose());
    const Eigen::Index r = std::min(m.rows(), m.cols());
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m.cols(), r);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    const Eigen::Index c = t[0].cols();
    const Eigen::MatrixXd Qt = Q.transpose();
    t[0] = Qt.leftCols(c);
    t[1] = Qt.rightCols(c);
    if (k > 0) {
        auto& prev = psi.site(k - 1);
        prev[0] = prev[0] * R.transpose();
        prev[1] = prev[1] * R.transpose();
    } else {
        t[0] *= R(0, 0);
        t[1] *= R(0, 0);
    }
}

} // namespace detail

/**
 * Bring the state to mixed-canonical form around `center` and return the norm
 * it had before. With `normalize` the centre tensor is rescaled to unit norm.
 */
inline double canonicalize(MatrixProductState& psi, int center, bool normalize = true) {
    const int L = psi.length();
    if (center < 0 || center >= L) throw ConfigError("canonical centre out of range");
    for (int k = 0; k < center; ++k) detail::left_orthonormalize(psi, k);
    for (int k = L - 1; k > center; --k) detail::right_orthonormalize(psi, k);
    auto& c = psi.site(center);
    const double norm = std::sqrt(c[0].squaredNorm() + c[1].squaredNorm());
    if (normalize && norm > 0.0) {
        c[0] /= norm;
        c[1] /= norm;
    }
    psi.set_center(center);
    return norm;
}

/// Move an existing orthogonality centre without touching the rest.
inline void move_center(MatrixProductState& psi, int target) {
    if (!psi.canonical()) {
        canonicalize(psi, target);
        return;
    }
    int c = psi.center();
    while (c < target) detail::left_orthonormalize(psi, c++);
    while (c > target) detail::right_orthonormalize(psi, c--);
    psi.set_center(target);
}

[[nodiscard]] inline MatrixProductState random_mps(const ChainGeometry& g, int chi, std::uint64_t seed) {
    g.validate();
    auto psi = g.hard() ? detail::random_blockaded_mps(g, std::max(chi, 4), seed)
                        : detail::random_mps_raw(g, std::max(chi, 1), seed);
    canonicalize(psi, 0);
    return psi;
}

/// <psi|psi> by transfer matrices, independent of the canonical form.
[[nodiscard]] inline double norm_squared(const MatrixProductState& psi) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Ones(1, 1);
    for (int k = 0; k < psi.length(); ++k) {
        const auto& t = psi.site(k);
        E = (t[0].transpose() * E * t[0] + t[1].transpose() * E * t[1]).eval();
    }
    return E(0, 0);
}

/// <a|b> for two states on the same chain.
[[nodiscard]] inline double overlap(const MatrixProductState& a, const MatrixProductState& b) {
    if (a.length() != b.length()) throw ConfigError("overlap: MPS lengths differ");
    Eigen::MatrixXd E = Eigen::MatrixXd::Ones(1, 1);
    for (int k = 0; k < a.length(); ++k)
        E = (a.site(k)[0].transpose() * E * b.site(k)[0] + a.site(k)[1].transpose() * E * b.site(k)[1]).eval();
    return E(0, 0);
}

/**
 * Largest deviation from the isometry conditions implied by the stored centre:
 * sum_n A^T A = 1 left of it, sum_n A A^T = 1 right of it.
 */
[[nodiscard]] inline double canonical_error(const MatrixProductState& psi) {
    if (!psi.canonical()) return std::numeric_limits<double>::infinity();
    double err = 0.0;
    for (int k = 0; k < psi.length(); ++k) {
        const auto& t = psi.site(k);
        if (k < psi.center()) {
            const Eigen::MatrixXd g = t[0].transpose() * t[0] + t[1].transpose() * t[1];
            err = std::max(err, (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
        } else if (k > psi.center()) {
            const Eigen::MatrixXd g = t[0] * t[0].transpose() + t[1] * t[1].transpose();
            err = std::max(err, (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
        }
    }
    return err;
}

/// Schmidt values across the bond between sites cut-1 and cut (1 <= cut < L).
[[nodiscard]] inline Eigen::VectorXd schmidt_values(MatrixProductState psi, int cut) {
    if (cut < 1 || cut >= psi.length()) throw ConfigError("entanglement cut out of range");
    move_center(psi, cut);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(detail::stack_cols(psi.site(cut)));
    return svd.singularValues();
}

[[nodiscard]] inline double entanglement_entropy(const Eigen::VectorXd& schmidt) {
    const double total = schmidt.squaredNorm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < schmidt.size(); ++i) {
        const double p = schmidt[i] * schmidt[i] / total;
        if (p > 1e-300) s -= p * std::log(p);
    }
    return s;
}

/// Von Neumann entropy of sites [0, cut) versus the rest.
[[nodiscard]] inline double half_chain_entropy(const MatrixProductState& psi, int cut) {
    if (cut <= 0 || cut >= psi.length()) return 0.0;
    return entanglement_entropy(schmidt_values(psi, cut));
}

/**
 * SVD compression sweep: keep at most chi_max Schmidt values per bond and drop
 * those whose squared weight falls below `cutoff` (relative). Returns the
 * largest discarded weight.
 */
inline double compress(MatrixProductState& psi, int chi_max, double cutoff = 1e-14) {
    canonicalize(psi, psi.length() - 1);
    double discarded = 0.0;
    for (int k = psi.length() - 1; k > 0; --k) {
        auto& t = psi.site(k);
        const Eigen::MatrixXd m = detail::stack_cols(t);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const double total = s.squaredNorm();
        Eigen::Index keep = 0;
        double kept = 0.0;
        while (keep < s.size() && keep < chi_max && s[keep] * s[keep] > cutoff * total) kept += s[keep] * s[keep], ++keep;
        keep = std::max<Eigen::Index>(keep, 1);
        discarded = std::max(discarded, total > 0.0 ? 1.0 - kept / total : 0.0);
        const Eigen::MatrixXd Vt = svd.matrixV().leftCols(keep).transpose();
        const Eigen::Index c = t[0].cols();
        t[0] = Vt.leftCols(c);
        t[1] = Vt.rightCols(c);
        const Eigen::MatrixXd US = svd.matrixU().leftCols(keep) * s.head(keep).asDiagonal();
        auto& prev = psi.site(k - 1);
        prev[0] = prev[0] * US;
        prev[1] = prev[1] * US;
    }
    psi.set_center(0);
    auto& c0 = psi.site(0);
    const double norm = std::sqrt(c0[0].squaredNorm() + c0[1].squaredNorm());
    if (norm > 0.0) {
        c0[0] /= norm;
        c0[1] /= norm;
    }
    return discarded;
}

// ---------------------------------------------------------------------------
// Dense bridge

/**
 * Amplitudes of every basis configuration. Weight outside the basis is
 * dropped and the result renormalised; its norm must stay below
 * `max_violation`. Hard-blockade DMRG states leak at the level of the square
 * root of the discarded SVD weight, hence the default.
 */
inline constexpr double kMaxBasisLeakage = 1e-4;

[[nodiscard]] inline DenseState mps_to_dense(const MatrixProductState& psi, BasisPtr basis,
                                             double max_violation = kMaxBasisLeakage) {
    const int L = psi.length();
    if (basis->length() != L) throw ConfigError("mps_to_dense: basis length differs from the MPS");
    const auto configs = basis->configs();
    Eigen::VectorXd amps(static_cast<Eigen::Index>(configs.size()));
    // prefix[k] = row vector after contracting sites 0..k-1 for the current config.
    std::vector<Eigen::RowVectorXd> prefix(static_cast<std::size_t>(L + 1));
    prefix[0] = Eigen::RowVectorXd::Ones(1);
    Config previous = 0;
    int valid = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const Config c = configs[i];
        int start = 0;
        if (i > 0) {
            const Config diff = c ^ previous;
            start = diff == 0 ? L : std::min(valid, std::countr_zero(diff));
        }
        for (int k = start; k < L; ++k)
            prefix[static_cast<std::size_t>(k + 1)] = prefix[static_cast<std::size_t>(k)] * psi.site(k)[occupied(c, k)];
        valid = L;
        previous = c;
        amps[static_cast<Eigen::Index>(i)] = prefix[static_cast<std::size_t>(L)](0);
    }
    const double total = norm_squared(psi);
    const double inside = amps.squaredNorm();
    const double outside = std::max(total - inside, 0.0) / total;
    if (std::sqrt(outside) > max_violation)
        throw ConstraintError("MPS carries norm " + std::to_string(std::sqrt(outside)) + " outside the target basis");
    amps /= std::sqrt(inside);
    fix_sign(amps);
    return DenseState{std::move(basis), std::move(amps)};
}

/// Exact MPS of a dense state by successive SVDs (small chains, used for cross-checks).
[[nodiscard]] inline MatrixProductState dense_to_mps(const DenseState& state, double cutoff = 1e-26) {
    const int L = state.length();
    if (L > 24) throw CapacityError("dense_to_mps limited to L <= 24");
    Eigen::VectorXd full = Eigen::VectorXd::Zero(Eigen::Index{1} << L);
    const auto configs = state.basis->configs();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        // Site 0 becomes the most significant digit of the row index.
        Config rev = 0;
        for (int k = 0; k < L; ++k)
            if (occupied(configs[i], k)) rev |= Config{1} << (L - 1 - k);
        full[static_cast<Eigen::Index>(rev)] = state.amplitudes[static_cast<Eigen::Index>(i)];
    }
    std::vector<MatrixProductState::SiteTensor> t(static_cast<std::size_t>(L));
    Eigen::MatrixXd rest = Eigen::Map<Eigen::MatrixXd>(full.data(), 1, full.size());
    // rest: rows = left bond, cols = remaining sites with site k the most significant.
    for (int k = 0; k < L - 1; ++k) {
        const Eigen::Index l = rest.rows();
        const Eigen::Index tail = rest.cols() / 2;
        Eigen::MatrixXd m(2 * l, tail);
        for (Eigen::Index a = 0; a < l; ++a) {
            // Column index of `rest` is (n_k * tail + remainder) when read as row-major digits.
            for (Eigen::Index r = 0; r < tail; ++r) {
                m(a, r) = rest(a, r);
                m(l + a, r) = rest(a, tail + r);
            }
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        Eigen::Index keep = 0;
        while (keep < s.size() && s[keep] * s[keep] > cutoff * s.squaredNorm()) ++keep;
        keep = std::max<Eigen::Index>(keep, 1);
        const Eigen::MatrixXd U = svd.matrixU().leftCols(keep);
        t[static_cast<std::size_t>(k)][0] = U.topRows(l);
        t[static_cast<std::size_t>(k)][1] = U.bottomRows(l);
        rest = s.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
    }
    t[static_cast<std::size_t>(L - 1)][0] = rest.col(0);
    t[static_cast<std::size_t>(L - 1)][1] = rest.col(1);
    return MatrixProductState(state.geometry(), std::move(t), L - 1);
}

// ---------------------------------------------------------------------------
// Diagonal reweighting, projection and measurement

namespace detail {

/// Multiply A[k][n] by w[k][n] and renormalise; returns the squared norm ratio.
inline double apply_site_weights(MatrixProductState& psi, const std::vector<std::array<double, 2>>& w) {
    for (int k = 0; k < psi.length(); ++k) {
        auto& t = psi.site(k);
        t[0] *= w[static_cast<std::size_t>(k)][0];
        t[1] *= w[static_cast<std::size_t>(k)][1];
    }
    const double norm = canonicalize(psi, 0);
    return norm * norm;
}

inline void check_mps_sector(const MatrixProductState& psi, const OutcomeSector& sector) {
    check_sector_geometry(psi.geometry(), sector);
}

inline std::vector<std::array<double, 2>> projector_weights(const OutcomeSector& sector) {
    std::vector<std::array<double, 2>> w(static_cast<std::size_t>(sector.geometry.length), {1.0, 1.0});
    for (std::size_t a = 0; a < sector.sites.size(); ++a)
        w[static_cast<std::size_t>(sector.sites[a])][static_cast<std::size_t>(1 - sector.outcomes[a])] = 0.0;
    return w;
}

/// Right-canonical copy (centre 0, unit norm).
inline MatrixProductState right_canonical(const MatrixProductState& psi) {
    MatrixProductState out = psi;
    if (out.center() != 0) canonicalize(out, 0);
    return out;
}

inline Eigen::MatrixXd transfer(const Eigen::MatrixXd& E, const MatrixProductState::SiteTensor& t, double w0,
                                double w1) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t[0].cols(), t[0].cols());
    if (w0 != 0.0) out.noalias() += w0 * (t[0].transpose() * E * t[0]);
    if (w1 != 0.0) out.noalias() += w1 * (t[1].transpose() * E * t[1]);
    return out;
}

} // namespace detail

[[nodiscard]] inline double sector_probability(const MatrixProductState& psi, const OutcomeSector& sector) {
    detail::check_mps_sector(psi, sector);
    const auto rc = detail::right_canonical(psi);
    Eigen::MatrixXd E = Eigen::MatrixXd::Ones(1, 1);
    std::size_t a = 0;
    for (int k = 0; k < rc.length(); ++k) {
        if (a < sector.sites.size() && sector.sites[a] == k) {
            const int o = sector.outcomes[a++];
            E = detail::transfer(E, rc.site(k), o == 0 ? 1.0 : 0.0, o == 1 ? 1.0 : 0.0);
        } else {
            E = detail::transfer(E, rc.site(k), 1.0, 1.0);
        }
        if (a == sector.sites.size()) break;   // right environment is the identity
    }
    return E.trace();
}

struct MpsProjection {
    MatrixProductState state;
    double probability = 0.0;
};

[[nodiscard]] inline MpsProjection project(const MatrixProductState& psi, const OutcomeSector& sector) {
    detail::check_mps_sector(psi, sector);
    MpsProjection out{detail::right_canonical(psi), 0.0};
    out.probability = detail::apply_site_weights(out.state, detail::projector_weights(sector));
    if (!(out.probability >= kZeroProbability))
        throw ZeroProbabilityError("sector '" + sector.pattern + "' has probability " + std::to_string(out.probability),
                                   out.probability);
    return out;
}

[[nodiscard]] inline MatrixProductState weak_measure(const MatrixProductState& psi, const OutcomeSector& sector,
                                                     double beta) {
    detail::check_mps_sector(psi, sector);
    if (!(beta >= 0.0)) throw ConfigError("weak measurement needs beta >= 0");
    MatrixProductState out = detail::right_canonical(psi);
    if (beta == 0.0) return out;
    // Per-site factors scaled so the larger one is 1.
    std::vector<std::array<double, 2>> w(static_cast<std::size_t>(psi.length()), {1.0, 1.0});
    for (std::size_t a = 0; a < sector.sites.size(); ++a)
        w[static_cast<std::size_t>(sector.sites[a])] =
            sector.outcomes[a] == 0 ? std::array<double, 2>{1.0, std::exp(-0.5 * beta)}
                                    : std::array<double, 2>{std::exp(-0.5 * beta), 1.0};
    const double ratio = detail::apply_site_weights(out, w);
    if (!(ratio > 1e-300)) throw ZeroProbabilityError("post-measurement norm underflow", ratio);
    return out;
}

[[nodiscard]] inline MatrixProductState generalized_measure(const MatrixProductState& psi, double beta, double theta) {
    const auto& g = psi.geometry();
    if (!g.periodic() || g.length % 2 != 0)
        throw ConfigError("generalized measurement is defined on periodic even-length chains");
    if (!(beta >= 0.0)) throw ConfigError("generalized measurement needs beta >= 0");
    MatrixProductState out = detail::right_canonical(psi);
    if (beta == 0.0) return out;
    const double s = std::sin(theta), c = std::cos(theta);
    std::vector<std::array<double, 2>> w(static_cast<std::size_t>(g.length));
    for (int j = 0; j < g.length; ++j) {
        const double e = -0.5 * beta * ((j % 2 == 0 ? s : -s) + c);
        // exp(e * n) scaled by max(1, exp(e)).
        w[static_cast<std::size_t>(j)] = e > 0.0 ? std::array<double, 2>{std::exp(-e), 1.0}
                                                 : std::array<double, 2>{1.0, std::exp(e)};
    }
    const double ratio = detail::apply_site_weights(out, w);
    if (!(ratio > 1e-300)) throw ZeroProbabilityError("post-measurement norm underflow", ratio);
    return out;
}

[[nodiscard]] inline MatrixProductState apply_measurement(const MatrixProductState& psi, const OutcomeSector* sector,
                                                          const MeasurementSpec& spec, double* probability = nullptr) {
    spec.validate();
    switch (spec.kind) {
        case MeasurementKind::projective: {
            if (sector == nullptr) throw ConfigError("projective measurement needs a pattern");
            auto p = project(psi, *sector);
            if (probability) *probability = p.probability;
            return std::move(p.state);
        }
        case MeasurementKind::weak:
            if (sector == nullptr) throw ConfigError("weak measurement needs a pattern");
            if (probability) *probability = std::numeric_limits<double>::quiet_NaN();
            return weak_measure(psi, *sector, spec.beta);
        case MeasurementKind::generalized:
            if (probability) *probability = std::numeric_limits<double>::quiet_NaN();
            return generalized_measure(psi, spec.beta, spec.theta);
    }
    return psi;
}

[[nodiscard]] inline ConditionalProbabilities conditional_probabilities(const MatrixProductState& psi,
                                                                        const OutcomeSector& sector) {
    detail::check_mps_sector(psi, sector);
    const auto rc = detail::right_canonical(psi);
    ConditionalProbabilities out;
    Eigen::MatrixXd E = Eigen::MatrixXd::Ones(1, 1);
    double prefix = 1.0;
    std::size_t a = 0;
    for (int k = 0; k < rc.length() && a < sector.sites.size(); ++k) {
        if (sector.sites[a] != k) {
            E = detail::transfer(E, rc.site(k), 1.0, 1.0);
            continue;
        }
        if (prefix < kZeroProbability) {
            out.zero_prefix_at = a;
            break;
        }
        const int o = sector.outcomes[a++];
        E = detail::transfer(E, rc.site(k), o == 0 ? 1.0 : 0.0, o == 1 ? 1.0 : 0.0);
        const double next = E.trace();
        out.values.push_back(next / prefix);
        prefix = next;
    }
    return out;
}

/// Born weight of every outcome string on `sites`; bit a of the index is the outcome at sites[a].
[[nodiscard]] inline std::vector<double> enumerate_sector_probabilities(const MatrixProductState& psi,
                                                                       const std::vector<int>& sites) {
    if (sites.size() > static_cast<std::size_t>(kMaxEnumeratedSites))
        throw CapacityError("outcome enumeration limited to " + std::to_string(kMaxEnumeratedSites) + " sites");
    std::vector<int> sorted = sites;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t a = 0; a < sorted.size(); ++a) {
        if (sorted[a] < 0 || sorted[a] >= psi.length()) throw ConfigError("measured site out of range");
        if (a > 0 && sorted[a] == sorted[a - 1]) throw ConfigError("site listed twice");
    }
    // Position of each sorted site in the caller's order, for the output bit layout.
    std::vector<int> bit_of(sorted.size());
    for (std::size_t a = 0; a < sorted.size(); ++a)
        bit_of[a] = static_cast<int>(std::find(sites.begin(), sites.end(), sorted[a]) - sites.begin());

    const auto rc = detail::right_canonical(psi);
    std::vector<double> probs(std::size_t{1} << sites.size(), 0.0);
    // Depth-first over measured sites; the right environment is the identity.
    auto recurse = [&](auto&& self, Eigen::MatrixXd E, int from, std::size_t a, std::size_t key) -> void {
        const double weight = E.trace();
        if (a == sorted.size() || weight < 1e-300) {
            if (a == sorted.size()) probs[key] = weight;
            return;
        }
        for (int k = from; k < sorted[a]; ++k) E = detail::transfer(E, rc.site(k), 1.0, 1.0);
        for (int o = 0; o < 2; ++o)
            self(self, detail::transfer(E, rc.site(sorted[a]), o == 0 ? 1.0 : 0.0, o == 1 ? 1.0 : 0.0), sorted[a] + 1,
                 a + 1, key | (static_cast<std::size_t>(o) << bit_of[a]));
    };
    recurse(recurse, Eigen::MatrixXd::Ones(1, 1), 0, 0, 0);
    return probs;
}

// ---------------------------------------------------------------------------
// Occupation moments

[[nodiscard]] inline Eigen::VectorXd occupations(const MatrixProductState& psi) {
    const auto rc = detail::right_canonical(psi);
    const int L = rc.length();
    Eigen::VectorXd n(L);
    Eigen::MatrixXd E = Eigen::MatrixXd::Ones(1, 1);
    for (int k = 0; k < L; ++k) {
        n[k] = detail::transfer(E, rc.site(k), 0.0, 1.0).trace();
        E = detail::transfer(E, rc.site(k), 1.0, 1.0);
    }
    return n;
}

/**
 * <n_i> and <n_i n_k> for |i - k| <= max_range (all pairs by default);
 * entries beyond the range are left at <n_i><n_k>.
 */
[[nodiscard]] inline OccupationMoments occupation_moments(const MatrixProductState& psi, int max_range = -1) {
    const auto rc = detail::right_canonical(psi);
    const int L = rc.length();
    const int range = max_range < 0 ? L : max_range;
    OccupationMoments out{rc.geometry(), Eigen::VectorXd(L), Eigen::MatrixXd::Zero(L, L)};
    std::vector<Eigen::MatrixXd> left(static_cast<std::size_t>(L));
    Eigen::MatrixXd E = Eigen::MatrixXd::Ones(1, 1);
    for (int k = 0; k < L; ++k) {
        left[static_cast<std::size_t>(k)] = E;
        out.mean[k] = detail::transfer(E, rc.site(k), 0.0, 1.0).trace();
        E = detail::transfer(E, rc.site(k), 1.0, 1.0);
    }
    out.joint = out.mean * out.mean.transpose();
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < L; ++i) {
        out.joint(i, i) = out.mean[i];
        Eigen::MatrixXd X = detail::transfer(left[static_cast<std::size_t>(i)], rc.site(i), 0.0, 1.0);
        for (int k = i + 1; k < L && k - i <= range; ++k) {
            const double v = detail::transfer(X, rc.site(k), 0.0, 1.0).trace();
            out.joint(i, k) = v;
            out.joint(k, i) = v;
            if (k + 1 < L && k + 1 - i <= range) X = detail::transfer(X, rc.site(k), 1.0, 1.0);
        }
    }
    return out;
}

[[nodiscard]] inline double expectation(const MatrixProductState& psi, const DiagonalObservable& obs) {
    return expectation(occupations(psi), obs);
}

[[nodiscard]] inline double sigma_bond(const MatrixProductState& psi, int j) {
    return expectation(psi, sigma_bond_observable(psi.geometry(), j));
}

[[nodiscard]] inline double epsilon_bond(const MatrixProductState& psi, int j) {
    return expectation(psi, epsilon_bond_observable(psi.geometry(), j));
}

[[nodiscard]] inline CorrelatorSeries connected_correlator(const MatrixProductState& psi,
                                                           const std::vector<DiagonalObservable>& obs,
                                                           const std::vector<ObservablePair>& pairs,
                                                           std::string sector = {}) {
    return connected_correlator(occupation_moments(psi), obs, pairs, std::move(sector));
}

[[nodiscard]] inline CorrelatorSeries one_point_profile(const MatrixProductState& psi,
                                                        const std::vector<DiagonalObservable>& obs,
                                                        std::string sector = {}) {
    return one_point_profile(occupations(psi), psi.geometry(), obs, std::move(sector));
}

// ---------------------------------------------------------------------------
// Sampling

/**
 * One Born-rule sample by left-to-right perfect sampling. `uniform` must
 * return values in [0, 1). The state must be right-canonical with unit norm.
 */
template <class Uniform>
std::vector<std::uint8_t> sample_right_canonical(const MatrixProductState& rc, Uniform&& uniform) {
    std::vector<std::uint8_t> shot(static_cast<std::size_t>(rc.length()));
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (int k = 0; k < rc.length(); ++k) {
        Eigen::RowVectorXd w0 = v * rc.site(k)[0];
        const double p0 = w0.squaredNorm();
        const double p1 = (v * rc.site(k)[1]).squaredNorm();
        const bool one = uniform() * (p0 + p1) >= p0;
        shot[static_cast<std::size_t>(k)] = one ? 1 : 0;
        if (one) v = (v * rc.site(k)[1]) / std::sqrt(p1);
        else v = w0 / std::sqrt(p0);
    }
    return shot;
}

/**
 * Sign convention: follow the most likely occupation site by site and make
 * the amplitude of the configuration reached this way positive.
 */
inline void fix_mps_sign(MatrixProductState& psi) {
    if (psi.center() != 0) canonicalize(psi, 0);
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (int k = 0; k < psi.length(); ++k) {
        Eigen::RowVectorXd w0 = v * psi.site(k)[0];
        Eigen::RowVectorXd w1 = v * psi.site(k)[1];
        v = w0.squaredNorm() >= w1.squaredNorm() ? std::move(w0) : std::move(w1);
    }
    if (v(0) < 0.0) {
        psi.site(0)[0] *= -1.0;
        psi.site(0)[1] *= -1.0;
    }
}

// ---------------------------------------------------------------------------
// Checkpoint:"RYDM", version, L, boundary, mode, centre, then per site
// (rows, cols) and row-major float64 data of the n = 0 and n = 1 blocks.

inline void write_checkpoint(std::ostream& os, const MatrixProductState& psi) {
    using namespace binary;
    const auto& g = psi.geometry();
    write_magic(os, "RYDM");
    write_le<std::uint32_t>(os, 1);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.length));
    write_le<std::uint8_t>(os, g.periodic() ? 0 : 1);
    write_le<std::uint8_t>(os, g.hard() ? 0 : 1);
    write_le<std::uint16_t>(os, 0);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(static_cast<std::int32_t>(psi.center())));
    for (int k = 0; k < psi.length(); ++k) {
        const auto& t = psi.site(k);
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t[0].rows()));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t[0].cols()));
        for (int n = 0; n < 2; ++n)
            for (Eigen::Index r = 0; r < t[0].rows(); ++r)
                for (Eigen::Index c = 0; c < t[0].cols(); ++c) write_f64(os, t[static_cast<std::size_t>(n)](r, c));
    }
}

[[nodiscard]] inline MatrixProductState read_mps_checkpoint(std::istream& is) {
    using namespace binary;
    expect_magic(is, "RYDM");
    if (const auto version = read_le<std::uint32_t>(is); version != 1)
        throw ConfigError("unsupported MPS checkpoint version " + std::to_string(version));
    ChainGeometry g;
    g.length = static_cast<int>(read_le<std::uint32_t>(is));
    g.boundary = read_le<std::uint8_t>(is) == 0 ? Boundary::periodic : Boundary::open;
    g.mode = read_le<std::uint8_t>(is) == 0 ? ConstraintMode::hard_blockade : ConstraintMode::penalty;
    (void)read_le<std::uint16_t>(is);
    const auto center = static_cast<std::int32_t>(read_le<std::uint32_t>(is));
    g.validate();
    std::vector<MatrixProductState::SiteTensor> t(static_cast<std::size_t>(g.length));
    for (auto& site : t) {
        const auto rows = read_le<std::uint32_t>(is);
        const auto cols = read_le<std::uint32_t>(is);
        for (auto& m : site) {
            m.resize(rows, cols);
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f64(is);
        }
    }
    return MatrixProductState(g, std::move(t), center);
}

} // namespace rydcrit
