// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file scaling.hpp
 * @brief Scaling-dimension fits and curve-crossing searches.
 *
 * Conventions for the reported exponent:
 *   - two-point correlators  C(d) ~ d^{-2 Delta}            (fit_power_law)
 *   - open-chain profiles    <O_l> ~ [sin x_l]^{-Delta}     (fit_obc_sine)
 *   - derivative trick       d<O>/dx ~ x^{nu}, Delta = -nu - 1 (fit_obc_derivative)
 * with x_l = pi (l + 1/2) / (L + 2) for an operator centred at l.
 *
 * All fits are unweighted least squares in log-log space. The quoted
 * standard error is the textbook slope error of that regression, converted
 * to the exponent.
 */

#pragma once

#include <rydcrit/dense_state.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/hamiltonian.hpp>
#include <rydcrit/measurement.hpp>
#include <rydcrit/observables.hpp>

#include <Eigen/Core>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace rydcrit {

// ---------------------------------------------------------------------------
// Distances

/// (L/pi) sin(pi d / L) with d = |l1 - l2| reduced to [0, L/2].
[[nodiscard]] inline double chord_distance(double l1, double l2, int length) {
    if (length <= 0) throw ConfigError("chord distance needs a positive ring length");
    const double L = length;
    double d = std::fmod(std::abs(l1 - l2), L);
    d = std::min(d, L - d);
    return L / std::numbers::pi * std::sin(std::numbers::pi * d / L);
}

/// Replace raw ring separations by chord distances.
[[nodiscard]] inline CorrelatorSeries to_chord(CorrelatorSeries s) {
    if (s.meta.boundary != Boundary::periodic) throw ConfigError("chord distance is defined on periodic chains only");
    if (s.meta.distance == "chord") return s;
    for (auto& p : s.points) p.separation = chord_distance(0.0, p.separation, s.meta.length);
    s.meta.distance = "chord";
    return s;
}

/// x_l = pi (l + 1/2) / (L + 2).
[[nodiscard]] inline double boundary_coordinate(double position, int length) {
    return std::numbers::pi * (position + 0.5) / (length + 2.0);
}

// ---------------------------------------------------------------------------
// Fits

struct FitResult {
    double exponent = 0.0;       ///< scaling dimension (or decay constant for probability fits)
    double stderr_ = 0.0;
    double window = 1.0;
    std::size_t n_points = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
    double rms_residual = 0.0;
    std::string convention;
    bool sign_flipped = false;   ///< fitted the magnitude of a uniformly negative series
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 1.0;
    double rms_residual = 0.0;
};

/// Ordinary least squares y = a + b x.
[[nodiscard]] inline LinearFit linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw FitError("linear regression needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("regression abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ssr += r * r;
    }
    f.rms_residual = std::sqrt(ssr / static_cast<double>(n));
    f.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
    f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    return f;
}

/// Number of points a window fraction keeps out of n.
[[nodiscard]] inline std::size_t window_count(std::size_t n, double window) {
    if (!(window > 0.0 && window <= 1.0)) throw ConfigError("fit window must lie in (0, 1]");
    return std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(window * static_cast<double>(n) - 1e-9)));
}

namespace detail {

/// Magnitudes of a series that must carry one sign; reports whether it was negative.
inline bool uniform_sign(const std::vector<double>& v, const char* what) {
    const bool neg = v.front() < 0.0;
    for (const double x : v) {
        if (x == 0.0 || (x < 0.0) != neg)
            throw FitError(std::string(what) +
                           ": values change sign inside the fit window; average adjacent unit cells "
                           "(two_cell_average) before fitting");
    }
    return neg;
}

inline FitResult finish(const LinearFit& lf, double exponent, double exponent_per_slope, double window,
                        std::size_t n, std::string convention, bool flipped) {
    FitResult r;
    r.exponent = exponent;
    r.stderr_ = std::abs(exponent_per_slope) * lf.slope_stderr;
    r.window = window;
    r.n_points = n;
    r.slope = lf.slope;
    r.intercept = lf.intercept;
    r.r_squared = lf.r_squared;
    r.rms_residual = lf.rms_residual;
    r.convention = std::move(convention);
    r.sign_flipped = flipped;
    return r;
}

} // namespace detail

/**
 * Fit log|C| against log d over the longest-range `window` fraction of points.
 * Delta = -slope / 2.
 */
[[nodiscard]] inline FitResult fit_power_law(const CorrelatorSeries& series, double window = 0.8,
                                             std::size_t min_points = 4) {
    auto pts = series.points;
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.separation < b.separation; });
    const std::size_t keep = window_count(pts.size(), window);
    if (keep < std::max<std::size_t>(min_points, 2))
        throw FitError("power-law fit needs at least " + std::to_string(min_points) + " points in the window, have " +
                       std::to_string(keep));
    std::vector<double> x, y, raw;
    for (std::size_t i = pts.size() - keep; i < pts.size(); ++i) {
        if (!(pts[i].separation > 0.0)) throw FitError("power-law fit needs positive separations");
        raw.push_back(pts[i].value);
    }
    const bool neg = detail::uniform_sign(raw, "power-law fit");
    for (std::size_t i = pts.size() - keep; i < pts.size(); ++i) {
        x.push_back(std::log(pts[i].separation));
        y.push_back(std::log(std::abs(pts[i].value)));
    }
    const auto lf = linear_regression(x, y);
    return detail::finish(lf, -0.5 * lf.slope, -0.5, window, keep, "C(d) ~ d^(-2 Delta)", neg);
}

/**
 * Fit log<O_l> against log sin(x_l) over the `window` fraction of points
 * furthest from the boundaries. Delta = -slope.
 */
[[nodiscard]] inline FitResult fit_obc_sine(const CorrelatorSeries& profile, int length, double window = 0.8,
                                            std::size_t min_points = 4) {
    if (profile.meta.boundary == Boundary::periodic && profile.meta.length != 0)
        throw ConfigError("sine fit applies to open-chain profiles");
    auto pts = profile.points;
    const double mid = 0.5 * std::numbers::pi;
    std::stable_sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
        return std::abs(boundary_coordinate(a.separation, length) - mid) <
               std::abs(boundary_coordinate(b.separation, length) - mid);
    });
    const std::size_t keep = window_count(pts.size(), window);
    if (keep < std::max<std::size_t>(min_points, 2)) throw FitError("sine fit has too few points in the window");
    std::vector<double> raw;
    for (std::size_t i = 0; i < keep; ++i) raw.push_back(pts[i].value);
    if (detail::uniform_sign(raw, "sine fit"))
        throw FitError("sine fit needs a positive profile inside the window");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < keep; ++i) {
        const double xl = boundary_coordinate(pts[i].separation, length);
        if (!(xl > 0.0 && xl < std::numbers::pi)) throw FitError("profile position outside the chain");
        x.push_back(std::log(std::sin(xl)));
        y.push_back(std::log(pts[i].value));
    }
    const auto lf = linear_regression(x, y);
    return detail::finish(lf, -lf.slope, -1.0, window, keep, "<O> ~ [sin x]^(-Delta)", false);
}

/// Abscissa of the derivative-trick regression.
enum class DerivativeAxis {
    x,      ///< log|dO/dx| against log x
    sine,   ///< log|dO/dx / cos x| against log sin x, exact for c + a [sin x]^(-Delta)
};

/**
 * Derivative trick for profiles with a bulk offset. Uses the left half of the
 * chain (x < pi/2), differentiates with three-point central differences on the
 * possibly nonuniform grid, and fits the log of the derivative magnitude over
 * the `window` fraction of those points furthest from the boundary.
 * Delta = -nu - 1 with nu the fitted slope.
 *
 * With DerivativeAxis::x the slope approaches -Delta - 1 only for x -> 0,
 * because d/dx [sin x]^(-Delta) carries a factor cos x that bends the curve
 * towards the chain centre. DerivativeAxis::sine divides that factor out.
 */
[[nodiscard]] inline FitResult fit_obc_derivative(const CorrelatorSeries& profile, int length, double window = 0.8,
                                                  std::size_t min_points = 4,
                                                  DerivativeAxis axis = DerivativeAxis::x) {
    auto pts = profile.points;
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.separation < b.separation; });
    std::vector<double> xs, ys;
    for (const auto& p : pts) {
        const double x = boundary_coordinate(p.separation, length);
        if (x < 0.5 * std::numbers::pi) {
            xs.push_back(x);
            ys.push_back(p.value);
        }
    }
    if (xs.size() < 3) throw FitError("derivative fit needs at least three points in the left half");
    std::vector<double> dx, dv;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        const double h0 = xs[i] - xs[i - 1];
        const double h1 = xs[i + 1] - xs[i];
        const double d = (h0 * h0 * (ys[i + 1] - ys[i]) + h1 * h1 * (ys[i] - ys[i - 1])) / (h0 * h1 * (h0 + h1));
        dx.push_back(xs[i]);
        dv.push_back(d);
    }
    const std::size_t keep = window_count(dx.size(), window);
    if (keep < std::max<std::size_t>(min_points, 2)) throw FitError("derivative fit has too few points in the window");
    const std::size_t first = dx.size() - keep;
    std::vector<double> raw(dv.begin() + static_cast<std::ptrdiff_t>(first), dv.end());
    (void)detail::uniform_sign(raw, "derivative fit");
    std::vector<double> x, y;
    for (std::size_t i = first; i < dx.size(); ++i) {
        if (axis == DerivativeAxis::x) {
            x.push_back(std::log(dx[i]));
            y.push_back(std::log(std::abs(dv[i])));
        } else {
            x.push_back(std::log(std::sin(dx[i])));
            y.push_back(std::log(std::abs(dv[i]) / std::cos(dx[i])));
        }
    }
    const auto lf = linear_regression(x, y);
    return detail::finish(lf, -lf.slope - 1.0, -1.0, window, keep,
                          axis == DerivativeAxis::x ? "d<O>/dx ~ x^nu, Delta = -nu - 1"
                                                    : "d<O>/dx / cos x ~ [sin x]^nu, Delta = -nu - 1",
                          false);
}

/// Means of consecutive pairs of points (separations and values); an odd last point is dropped.
[[nodiscard]] inline CorrelatorSeries two_cell_average(const CorrelatorSeries& s) {
    if (s.points.size() < 2) throw FitError("two-cell average needs at least two points");
    CorrelatorSeries out;
    out.meta = s.meta;
    for (std::size_t i = 0; i + 1 < s.points.size(); i += 2) {
        const auto& a = s.points[i];
        const auto& b = s.points[i + 1];
        SeriesPoint p{0.5 * (a.separation + b.separation), 0.5 * (a.value + b.value), std::nullopt};
        if (a.error && b.error) p.error = 0.5 * std::hypot(*a.error, *b.error);
        out.points.push_back(p);
    }
    return out;
}

struct ProbabilityDecayFit {
    FitResult fit;         ///< exponent = decay constant kappa in P ~ A exp(-kappa L)
    double density = 0.0;  ///< measured fraction k
    [[nodiscard]] double decay() const noexcept { return fit.exponent; }
    /// xi_n in P ~ exp(-k L / xi_n).
    [[nodiscard]] double xi() const noexcept { return density / fit.exponent; }
    [[nodiscard]] double extrapolate(double length) const noexcept {
        return std::exp(fit.intercept + fit.slope * length);
    }
};

[[nodiscard]] inline ProbabilityDecayFit fit_probability_decay(const std::vector<std::pair<int, double>>& data,
                                                               double density) {
    if (data.size() < 4) throw FitError("probability decay fit needs at least four sizes");
    std::vector<double> x, y;
    for (const auto& [L, p] : data) {
        if (!(p > 0.0)) throw FitError("probability decay fit needs positive probabilities");
        x.push_back(L);
        y.push_back(std::log(p));
    }
    const auto lf = linear_regression(x, y);
    return ProbabilityDecayFit{detail::finish(lf, -lf.slope, -1.0, 1.0, data.size(), "P(L) ~ A exp(-kappa L)", false),
                               density};
}

// ---------------------------------------------------------------------------
// Curve crossings

struct CurveFamily {
    std::vector<double> grid;                 ///< abscissa values, ascending
    std::vector<int> sizes;                   ///< one curve per size, ascending
    std::vector<std::vector<double>> values;  ///< values[size index][grid index]
    std::string abscissa = "x";
    std::string quantity;
};

struct PairCrossing {
    int size_a = 0;
    int size_b = 0;
    double value = 0.0;
};

struct CrossingResult {
    double value = 0.0;    ///< crossing of the largest consecutive pair
    double spread = 0.0;   ///< max - min over the consecutive-pair crossings
    std::vector<PairCrossing> pairs;
};

/// All zero crossings of (b - a) on the grid, by linear interpolation.
[[nodiscard]] inline std::vector<double> pairwise_crossings(const std::vector<double>& grid,
                                                            const std::vector<double>& a,
                                                            const std::vector<double>& b) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double d0 = b[i] - a[i];
        const double d1 = b[i + 1] - a[i + 1];
        if (d0 == 0.0) {
            if (out.empty() || out.back() != grid[i]) out.push_back(grid[i]);
            continue;
        }
        if ((d0 < 0.0) != (d1 < 0.0) && d1 != 0.0) out.push_back(grid[i] + (grid[i + 1] - grid[i]) * d0 / (d0 - d1));
        if (d1 == 0.0 && i + 2 == grid.size()) out.push_back(grid[i + 1]);
    }
    return out;
}

[[nodiscard]] inline CrossingResult find_curve_crossing(const CurveFamily& f) {
    if (f.sizes.size() < 2) throw FitError("crossing search needs at least two curves");
    if (f.values.size() != f.sizes.size()) throw ConfigError("curve family is inconsistent");
    for (const auto& v : f.values)
        if (v.size() != f.grid.size()) throw ConfigError("curve length differs from the grid");
    CrossingResult r;
    for (std::size_t k = 0; k + 1 < f.sizes.size(); ++k) {
        const auto xs = pairwise_crossings(f.grid, f.values[k], f.values[k + 1]);
        const std::string tag = "L=" + std::to_string(f.sizes[k]) + "/" + std::to_string(f.sizes[k + 1]);
        if (xs.empty()) throw FitError("no crossing between curves " + tag + " inside the grid");
        if (xs.size() > 1) {
            std::string list;
            for (const double x : xs) list += (list.empty() ? "" : ", ") + std::to_string(x);
            throw FitError("ambiguous crossing between curves " + tag + ": " + list);
        }
        r.pairs.push_back({f.sizes[k], f.sizes[k + 1], xs.front()});
    }
    r.value = r.pairs.back().value;
    double lo = r.value, hi = r.value;
    for (const auto& p : r.pairs) {
        lo = std::min(lo, p.value);
        hi = std::max(hi, p.value);
    }
    r.spread = hi - lo;
    return r;
}

namespace detail {

inline DenseState solve_ground_state(const HamiltonianParams& params, const ChainGeometry& g,
                                     const GroundStateOptions& opts) {
    auto basis = make_basis(g);
    const auto H = build_hamiltonian(params, g, *basis);
    try {
        return ground_state_auto(H, std::move(basis), opts).state;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::convergence || e.kind() == ErrorKind::degeneracy)
            throw ConvergenceError(std::string(e.what()) + " [L=" + std::to_string(g.length) +
                                       ", Delta=" + std::to_string(params.delta) + "]",
                                   0.0);
        throw;
    }
}

} // namespace detail

/**
 * Rescaled mid-chain order parameter on odd open chains:
 *   y(L, Delta) = <sigma_{(L-1)/2 + 1/2}> * sin(pi/(L+2))^{-1/8}.
 */
[[nodiscard]] inline CurveFamily scan_detuning(const std::vector<int>& sizes, const std::vector<double>& grid,
                                               const HamiltonianParams& base,
                                               ConstraintMode mode = ConstraintMode::hard_blockade,
                                               const GroundStateOptions& opts = {}) {
    CurveFamily f;
    f.grid = grid;
    f.sizes = sizes;
    std::sort(f.sizes.begin(), f.sizes.end());
    f.abscissa = "delta";
    f.quantity = "sigma_mid * sin(pi/(L+2))^(-1/8)";
    for (const int L : f.sizes) {
        if (L % 2 == 0) throw ConfigError("detuning scans use odd open chains, got L=" + std::to_string(L));
        const ChainGeometry g{L, Boundary::open, mode};
        const double rescale = std::pow(std::sin(std::numbers::pi / (L + 2.0)), -0.125);
        std::vector<double> row(grid.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(grid.size()); ++i) {
            HamiltonianParams p = base;
            p.delta = grid[static_cast<std::size_t>(i)];
            const auto psi = detail::solve_ground_state(p, g, opts);
            row[static_cast<std::size_t>(i)] = sigma_bond(psi, (L - 1) / 2) * rescale;
        }
        f.values.push_back(std::move(row));
    }
    return f;
}

/// <sigma_{1/2}> after a generalized measurement, one curve per ring size.
[[nodiscard]] inline CurveFamily sweep_theta(const std::vector<DenseState>& states, double beta,
                                             const std::vector<double>& thetas) {
    CurveFamily f;
    f.grid = thetas;
    f.abscissa = "theta";
    f.quantity = "sigma_1/2 at beta=" + std::to_string(beta);
    std::vector<const DenseState*> order;
    for (const auto& s : states) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->length() < b->length(); });
    for (const auto* s : order) {
        f.sizes.push_back(s->length());
        const auto obs = sigma_bond_observable(s->geometry(), 0);
        std::vector<double> row(thetas.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(thetas.size()); ++i)
            row[static_cast<std::size_t>(i)] =
                expectation(generalized_measure(*s, beta, thetas[static_cast<std::size_t>(i)]), obs);
        f.values.push_back(std::move(row));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Reports

[[nodiscard]] inline nlohmann::json to_json(const FitResult& r) {
    return nlohmann::json{{"delta", r.exponent},          {"stderr", r.stderr_},
                          {"window", r.window},           {"n_points", r.n_points},
                          {"convention", r.convention},   {"slope", r.slope},
                          {"intercept", r.intercept},     {"r_squared", r.r_squared},
                          {"rms_residual", r.rms_residual}, {"sign_flipped", r.sign_flipped}};
}

[[nodiscard]] inline nlohmann::json to_json(const CrossingResult& r) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairs) pairs.push_back({{"L_a", p.size_a}, {"L_b", p.size_b}, {"crossing", p.value}});
    return nlohmann::json{{"crossing", r.value}, {"spread", r.spread}, {"pairs", pairs}};
}

/// Rows = grid points, columns = sizes.
inline void write_csv(std::ostream& os, const CurveFamily& f) {
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    os << f.abscissa;
    for (const int L : f.sizes) os << ",L=" << L;
    os << '\n';
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        os << f.grid[i];
        for (const auto& row : f.values) os << ',' << row[i];
        os << '\n';
    }
    os.precision(old);
}

} // namespace rydcrit
