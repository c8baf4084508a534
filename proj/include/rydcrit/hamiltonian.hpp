// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file hamiltonian.hpp
 * @brief Rydberg chain Hamiltonian as a sparse operator on a blockaded basis.
 *
 *   H = sum_j [ (Omega/2)(b_j + b_j^+) - Delta n_j + V1 n_j n_{j+1} + V2 n_j n_{j+2} ]
 *
 * Pair terms are summed once per site j (with wrap-around on periodic
 * chains). In hard-blockade mode V1 vanishes identically on the basis and is
 * ignored.
 */

#pragma once

#include <rydcrit/errors.hpp>
#include <rydcrit/lattice_basis.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rydcrit {

struct HamiltonianParams {
    double omega = 1.0;
    double delta = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
    /// Open chains only: use Delta - V2 as the detuning of the first and last site.
    bool edge_detuning_shift = false;

    void validate() const {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw ConfigError("Rabi frequency omega must be positive and finite");
        if (!std::isfinite(delta) || !std::isfinite(v1) || !std::isfinite(v2))
            throw ConfigError("Hamiltonian parameters must be finite");
    }

    friend bool operator==(const HamiltonianParams&, const HamiltonianParams&) = default;
};

enum class CriticalModel { ising, tci };

inline CriticalModel parse_model(std::string_view s) {
    if (s == "ising") return CriticalModel::ising;
    if (s == "tci") return CriticalModel::tci;
    throw ConfigError("unknown model '" + std::string(s) + "' (expected ising|tci)");
}
[[nodiscard]] inline std::string_view to_string(CriticalModel m) noexcept {
    return m == CriticalModel::ising ? "ising" : "tci";
}

/// Ising detuning located by curve crossing at V2 = 0 with a V1 = 100 penalty.
inline constexpr double kIsingCriticalDetuning = 0.66445;

/// The same Ising point with the blockade imposed exactly (V1 -> infinity).
/// Located where L (E1 - E0) of periodic chains of different length coincide;
/// there (E2 - E0)/(E1 - E0) approaches 8 = Delta_eps / Delta_sigma.
inline constexpr double kIsingCriticalDetuningHard = 0.655;

/**
 * Critical-point parameters in units of Omega = 1.
 *
 * Ising: V2 = 0, V1 = 100 and Delta = 0.66445 with the V1 penalty. The finite
 * V1 shifts the transition, so the exact-blockade variant uses Delta = 0.655.
 * TCI (integrable point of the constrained chain):
 *   Delta = -(1/2) sqrt(5 sqrt5 - 2),  V2 = -(1/2) phi^{5/2},  V1 = 1000.
 * At this point the ratio (E2 - E0)/(E1 - E0) on periodic chains approaches
 * 8/3, the ratio of the TCI energy and spin scaling dimensions.
 * V1 only matters in penalty mode.
 */
[[nodiscard]] inline HamiltonianParams critical_preset(CriticalModel model,
                                                       ConstraintMode mode = ConstraintMode::penalty) {
    HamiltonianParams p;
    p.omega = 1.0;
    if (model == CriticalModel::ising) {
        p.delta = mode == ConstraintMode::penalty ? kIsingCriticalDetuning : kIsingCriticalDetuningHard;
        p.v1 = 100.0;
        p.v2 = 0.0;
    } else {
        const double sqrt5 = std::sqrt(5.0);
        const double phi = 0.5 * (1.0 + sqrt5);
        p.delta = -0.5 * std::sqrt(5.0 * sqrt5 - 2.0);
        p.v2 = -0.5 * std::pow(phi, 2.5);
        p.v1 = 1000.0;
    }
    return p;
}

/// Detuning seen by `site`, including the optional open-chain edge shift.
[[nodiscard]] inline double site_detuning(const HamiltonianParams& p, const ChainGeometry& g, int site) noexcept {
    if (p.edge_detuning_shift && !g.periodic() && (site == 0 || site == g.length - 1))
        return p.delta - p.v2;
    return p.delta;
}

/// Sum over j of n_j n_{j+k} with the wrap convention of the geometry.
[[nodiscard]] inline int pair_count(Config c, const ChainGeometry& g, int k) noexcept {
    const int L = g.length;
    int count = 0;
    for (int j = 0; j < L; ++j) {
        int partner = j + k;
        if (partner >= L) {
            if (!g.periodic()) break;
            partner -= L;
        }
        count += static_cast<int>(occupied(c, j) && occupied(c, partner));
    }
    return count;
}

/// <c|H|c>.
[[nodiscard]] inline double diagonal_energy(const HamiltonianParams& p, const ChainGeometry& g, Config c) noexcept {
    double e = 0.0;
    for (int j = 0; j < g.length; ++j)
        if (occupied(c, j)) e -= site_detuning(p, g, j);
    if (!g.hard()) e += p.v1 * pair_count(c, g, 1);
    if (p.v2 != 0.0) e += p.v2 * pair_count(c, g, 2);
    return e;
}

/**
 * Real symmetric operator in compressed-row layout.
 *
 * Rows hold their entries sorted by column, diagonal included.
 */
class SparseOperator {
public:
    SparseOperator() = default;

    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    [[nodiscard]] std::size_t nonzeros() const noexcept { return values_.size(); }

    /// y = H x. Rows are independent so the loop parallelises without changing results.
    void apply(std::span<const double> x, std::span<double> y) const noexcept {
        const auto n = static_cast<std::int64_t>(dim_);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
        for (std::int64_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[cols_[k]];
            y[static_cast<std::size_t>(r)] = acc;
        }
    }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        y.resize(x.size());
        apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
              std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
    }

    [[nodiscard]] double entry(std::size_t r, std::size_t c) const noexcept {
        const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
        const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
        const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(c));
        return (it != end && *it == c) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
    }

    [[nodiscard]] double diagonal(std::size_t r) const noexcept { return entry(r, r); }

    [[nodiscard]] bool is_symmetric(double tol = 0.0) const noexcept {
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                if (std::abs(values_[k] - entry(cols_[k], r)) > tol) return false;
        return true;
    }

    [[nodiscard]] Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols_[k])) = values_[k];
        return m;
    }

    /// Coordinate triples "row col value", one per line, for debugging.
    void write_triples(std::ostream& os) const {
        const auto old = os.precision(std::numeric_limits<double>::max_digits10);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                os << r << ' ' << cols_[k] << ' ' << values_[k] << '\n';
        os.precision(old);
    }

    friend SparseOperator build_hamiltonian(const HamiltonianParams&, const ChainGeometry&, const BlockadedBasis&);
    friend SparseOperator make_diagonal_operator(std::span<const double>);

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> cols_;
    std::vector<double> values_;
};

/// Diagonal operator, mostly useful for tests and solver checks.
[[nodiscard]] inline SparseOperator make_diagonal_operator(std::span<const double> diag) {
    SparseOperator op;
    op.dim_ = diag.size();
    op.row_ptr_.assign(1, 0);
    for (std::size_t r = 0; r < diag.size(); ++r) {
        op.cols_.push_back(static_cast<std::uint32_t>(r));
        op.values_.push_back(diag[r]);
        op.row_ptr_.push_back(op.values_.size());
    }
    return op;
}

[[nodiscard]] inline SparseOperator build_hamiltonian(const HamiltonianParams& params,
                                                      const ChainGeometry& geometry,
                                                      const BlockadedBasis& basis) {
    params.validate();
    if (!(basis.geometry() == geometry))
        throw ConfigError("basis was enumerated for a different geometry");
    if (basis.dimension() > std::numeric_limits<std::uint32_t>::max())
        throw CapacityError("basis too large for 32-bit column indices");

    SparseOperator op;
    op.dim_ = basis.dimension();
    op.row_ptr_.assign(1, 0);
    op.row_ptr_.reserve(op.dim_ + 1);
    const double hop = 0.5 * params.omega;
    const int L = geometry.length;

    std::vector<std::pair<std::uint32_t, double>> row;
    for (std::size_t r = 0; r < op.dim_; ++r) {
        const Config c = basis.config_of(r);
        row.clear();
        row.emplace_back(static_cast<std::uint32_t>(r), diagonal_energy(params, geometry, c));
        for (int j = 0; j < L; ++j) {
            if (const auto idx = basis.find(c ^ (Config{1} << j)))
                row.emplace_back(static_cast<std::uint32_t>(*idx), hop);
        }
        std::sort(row.begin(), row.end());
        for (const auto& [col, val] : row) {
            op.cols_.push_back(col);
            op.values_.push_back(val);
        }
        op.row_ptr_.push_back(op.values_.size());
    }
    return op;
}

} // namespace rydcrit
