// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file pipeline.hpp
 * @brief Run configuration and the prepare, measure, correlate, fit pipeline.
 *
 * A run is described by one JSON document:
 *
 * @code{.json}
 * {
 *   "model": "ising",                  // "ising", "tci" or "custom"
 *   "params": {"delta": 0.655},        // optional overrides of the preset
 *   "geometry": {"L": 16, "boundary": "periodic", "constraint": "hard"},
 *   "solver": {"backend": "auto", "tol": 1e-10,
 *              "dmrg": {"chi_max": 128, "truncation_cutoff": 1e-10}},
 *   "pattern": "n[2j]=0",
 *   "measurement": {"kind": "projective", "beta": 0, "theta": 0},
 *   "analysis": {"operator": "sigma", "fit": "auto", "window": 0.8},
 *   "output_dir": "run",
 *   "seed": 1
 * }
 * @endcode
 *
 * Unknown keys are rejected at every level. A run writes, into output_dir:
 * ground_state.bin, measured_state.bin (when a measurement is applied),
 * sector.json, correlator.csv with correlator.json, fit.json and
 * manifest.json. A failing stage writes error.json instead of the later
 * files and the run returns the matching exit code.
 */

#pragma once

#include <rydcrit/binary_io.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/hamiltonian.hpp>
#include <rydcrit/measurement.hpp>
#include <rydcrit/observables.hpp>
#include <rydcrit/pattern.hpp>
#include <rydcrit/scaling.hpp>
#include <rydcrit/solve.hpp>
#include <rydcrit/version.hpp>
#include <rydcrit/wavefunction.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rydcrit {

enum class OperatorKind { sigma, epsilon, epsilon_z2 };
enum class FitKind { automatic, power_law, obc_sine, obc_derivative, none };

[[nodiscard]] inline std::string_view to_string(OperatorKind k) noexcept {
    switch (k) {
        case OperatorKind::sigma: return "sigma";
        case OperatorKind::epsilon: return "epsilon";
        case OperatorKind::epsilon_z2: return "epsilon_z2";
    }
    return "sigma";
}

inline OperatorKind parse_operator_kind(std::string_view s) {
    if (s == "sigma") return OperatorKind::sigma;
    if (s == "epsilon") return OperatorKind::epsilon;
    if (s == "epsilon_z2") return OperatorKind::epsilon_z2;
    throw ConfigError("unknown operator '" + std::string(s) + "' (expected sigma|epsilon|epsilon_z2)");
}

[[nodiscard]] inline std::string_view to_string(FitKind k) noexcept {
    switch (k) {
        case FitKind::automatic: return "auto";
        case FitKind::power_law: return "power_law";
        case FitKind::obc_sine: return "obc_sine";
        case FitKind::obc_derivative: return "obc_derivative";
        case FitKind::none: return "none";
    }
    return "auto";
}

inline FitKind parse_fit_kind(std::string_view s) {
    if (s == "auto") return FitKind::automatic;
    if (s == "power_law") return FitKind::power_law;
    if (s == "obc_sine") return FitKind::obc_sine;
    if (s == "obc_derivative") return FitKind::obc_derivative;
    if (s == "none") return FitKind::none;
    throw ConfigError("unknown fit '" + std::string(s) + "' (expected auto|power_law|obc_sine|obc_derivative|none)");
}

[[nodiscard]] inline std::string_view to_string(DerivativeAxis a) noexcept {
    return a == DerivativeAxis::x ? "x" : "sine";
}

inline DerivativeAxis parse_derivative_axis(std::string_view s) {
    if (s == "x") return DerivativeAxis::x;
    if (s == "sine") return DerivativeAxis::sine;
    throw ConfigError("unknown derivative axis '" + std::string(s) + "' (expected x|sine)");
}

struct AnalysisConfig {
    OperatorKind op = OperatorKind::sigma;
    FitKind fit = FitKind::automatic;
    double window = 0.8;
    std::size_t min_points = 4;
    bool two_cell_average = false;
    DerivativeAxis axis = DerivativeAxis::x;
};

struct RunConfig {
    std::string model = "ising";   ///< "ising", "tci" or "custom"
    HamiltonianParams params;      ///< resolved parameters (preset plus overrides)
    ChainGeometry geometry{16, Boundary::periodic, ConstraintMode::hard_blockade};
    SolverConfig solver;
    std::string pattern;
    MeasurementSpec measurement;
    AnalysisConfig analysis;
    std::string output_dir = "rydcrit-run";
    std::uint64_t seed = 1;

    /// True when a measurement changes the state.
    [[nodiscard]] bool measures() const noexcept {
        return !pattern.empty() || measurement.kind == MeasurementKind::generalized;
    }

    void validate() const {
        geometry.validate();
        params.validate();
        solver.dmrg.validate();
        measurement.validate();
        if (!(analysis.window > 0.0 && analysis.window <= 1.0)) throw ConfigError("analysis.window must lie in (0, 1]");
        if (analysis.min_points < 2) throw ConfigError("analysis.min_points must be at least 2");
        if (measurement.kind != MeasurementKind::generalized && pattern.empty() && measurement.kind != MeasurementKind::projective)
            throw ConfigError("a weak measurement needs a pattern");
        if (!pattern.empty()) (void)expand_pattern(pattern, geometry);
        if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const auto key : keys) known = known || k == key;
        if (!known) throw ConfigError("unknown key '" + k + "' in " + std::string(where));
    }
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out, std::string_view where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(where) + "." + key + " has the wrong type");
    }
}

} // namespace detail

/// Parse and validate a run configuration. Keys are optional unless noted; unknown keys throw.
[[nodiscard]] inline RunConfig parse_run_config(const nlohmann::json& j) {
    using detail::read_opt;
    detail::reject_unknown(j, "config",
                           {"model", "params", "geometry", "solver", "pattern", "measurement", "analysis", "output_dir",
                            "seed"});
    RunConfig c;
    read_opt(j, "model", c.model, "config");
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        detail::reject_unknown(g, "geometry", {"L", "boundary", "constraint"});
        read_opt(g, "L", c.geometry.length, "geometry");
        if (g.contains("boundary")) c.geometry.boundary = parse_boundary(g.at("boundary").get<std::string>());
        if (g.contains("constraint")) c.geometry.mode = parse_constraint(g.at("constraint").get<std::string>());
    }
    if (c.model == "ising" || c.model == "tci") c.params = critical_preset(parse_model(c.model), c.geometry.mode);
    else if (c.model != "custom") throw ConfigError("model must be ising, tci or custom, got '" + c.model + "'");
    if (j.contains("params")) {
        const auto& p = j.at("params");
        detail::reject_unknown(p, "params", {"omega", "delta", "v1", "v2", "edge_shift"});
        read_opt(p, "omega", c.params.omega, "params");
        read_opt(p, "delta", c.params.delta, "params");
        read_opt(p, "v1", c.params.v1, "params");
        read_opt(p, "v2", c.params.v2, "params");
        read_opt(p, "edge_shift", c.params.edge_detuning_shift, "params");
    } else if (c.model == "custom") {
        throw ConfigError("model 'custom' needs a params object");
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        detail::reject_unknown(s, "solver", {"backend", "tol", "krylov_dim", "max_matvecs", "dense_cap", "dmrg"});
        if (s.contains("backend")) c.solver.backend = parse_backend(s.at("backend").get<std::string>());
        read_opt(s, "tol", c.solver.exact.tol, "solver");
        read_opt(s, "krylov_dim", c.solver.exact.krylov_dim, "solver");
        read_opt(s, "max_matvecs", c.solver.exact.max_matvecs, "solver");
        read_opt(s, "dense_cap", c.solver.exact.dense_cap, "solver");
        if (s.contains("dmrg")) {
            const auto& d = s.at("dmrg");
            detail::reject_unknown(d, "solver.dmrg",
                                   {"chi_max", "entropy_tol", "energy_tol", "max_sweeps", "min_sweeps",
                                    "truncation_cutoff", "initial_chi"});
            read_opt(d, "chi_max", c.solver.dmrg.chi_max, "solver.dmrg");
            read_opt(d, "entropy_tol", c.solver.dmrg.entropy_tol, "solver.dmrg");
            read_opt(d, "energy_tol", c.solver.dmrg.energy_tol, "solver.dmrg");
            read_opt(d, "max_sweeps", c.solver.dmrg.max_sweeps, "solver.dmrg");
            read_opt(d, "min_sweeps", c.solver.dmrg.min_sweeps, "solver.dmrg");
            read_opt(d, "truncation_cutoff", c.solver.dmrg.truncation_cutoff, "solver.dmrg");
            read_opt(d, "initial_chi", c.solver.dmrg.initial_chi, "solver.dmrg");
        }
    }
    read_opt(j, "pattern", c.pattern, "config");
    if (j.contains("measurement")) {
        const auto& m = j.at("measurement");
        detail::reject_unknown(m, "measurement", {"kind", "beta", "theta"});
        if (m.contains("kind")) c.measurement.kind = parse_measurement_kind(m.at("kind").get<std::string>());
        read_opt(m, "beta", c.measurement.beta, "measurement");
        read_opt(m, "theta", c.measurement.theta, "measurement");
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        detail::reject_unknown(a, "analysis", {"operator", "fit", "window", "min_points", "two_cell_average", "axis"});
        if (a.contains("operator")) c.analysis.op = parse_operator_kind(a.at("operator").get<std::string>());
        if (a.contains("fit")) c.analysis.fit = parse_fit_kind(a.at("fit").get<std::string>());
        read_opt(a, "window", c.analysis.window, "analysis");
        read_opt(a, "min_points", c.analysis.min_points, "analysis");
        read_opt(a, "two_cell_average", c.analysis.two_cell_average, "analysis");
        if (a.contains("axis")) c.analysis.axis = parse_derivative_axis(a.at("axis").get<std::string>());
    }
    read_opt(j, "output_dir", c.output_dir, "config");
    read_opt(j, "seed", c.seed, "config");
    c.validate();
    return c;
}

/// Parse JSON text; syntax errors raise ParseError carrying the byte offset.
[[nodiscard]] inline RunConfig parse_run_config_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what(), e.byte);
    }
    return parse_run_config(j);
}

/// Fully resolved configuration; parse_run_config(to_json(c)) reproduces c.
[[nodiscard]] inline nlohmann::json to_json(const RunConfig& c) {
    return nlohmann::json{
        {"model", c.model},
        {"params",
         {{"omega", c.params.omega},
          {"delta", c.params.delta},
          {"v1", c.params.v1},
          {"v2", c.params.v2},
          {"edge_shift", c.params.edge_detuning_shift}}},
        {"geometry",
         {{"L", c.geometry.length},
          {"boundary", std::string(to_string(c.geometry.boundary))},
          {"constraint", std::string(to_string(c.geometry.mode))}}},
        {"solver",
         {{"backend", std::string(to_string(c.solver.backend))},
          {"tol", c.solver.exact.tol},
          {"krylov_dim", c.solver.exact.krylov_dim},
          {"max_matvecs", c.solver.exact.max_matvecs},
          {"dense_cap", c.solver.exact.dense_cap},
          {"dmrg",
           {{"chi_max", c.solver.dmrg.chi_max},
            {"entropy_tol", c.solver.dmrg.entropy_tol},
            {"energy_tol", c.solver.dmrg.energy_tol},
            {"max_sweeps", c.solver.dmrg.max_sweeps},
            {"min_sweeps", c.solver.dmrg.min_sweeps},
            {"truncation_cutoff", c.solver.dmrg.truncation_cutoff},
            {"initial_chi", c.solver.dmrg.initial_chi}}}}},
        {"pattern", c.pattern},
        {"measurement",
         {{"kind", std::string(to_string(c.measurement.kind))},
          {"beta", c.measurement.beta},
          {"theta", c.measurement.theta}}},
        {"analysis",
         {{"operator", std::string(to_string(c.analysis.op))},
          {"fit", std::string(to_string(c.analysis.fit))},
          {"window", c.analysis.window},
          {"min_points", c.analysis.min_points},
          {"two_cell_average", c.analysis.two_cell_average},
          {"axis", std::string(to_string(c.analysis.axis))}}},
        {"output_dir", c.output_dir},
        {"seed", c.seed}};
}

/// Hash of the resolved configuration. JSON objects keep keys sorted, so key order in the input does not matter.
[[nodiscard]] inline std::string config_hash(const RunConfig& c) {
    return binary::hex64(binary::fnv1a64(to_json(c).dump()));
}

// ---------------------------------------------------------------------------
// Analysis helpers shared with the command-line tool

/// Operator family for a state, with or without a post-selection sector.
[[nodiscard]] inline std::vector<DiagonalObservable> build_operators(OperatorKind op, const ChainGeometry& g,
                                                                     const OutcomeSector* sector) {
    if (sector == nullptr) {
        switch (op) {
            case OperatorKind::sigma: return sigma_bonds(g);
            case OperatorKind::epsilon: return epsilon_bonds(g);
            case OperatorKind::epsilon_z2:
                throw ConfigError("epsilon_z2 operators need the {n_3j, n_3j+1 = 0} sector");
        }
    }
    switch (op) {
        case OperatorKind::sigma: return build_sigma_n(*sector);
        case OperatorKind::epsilon: return build_epsilon_n(*sector);
        case OperatorKind::epsilon_z2: return build_epsilon_z2(*sector);
    }
    return {};
}

/// Connected correlator (periodic chains, chord distance) or one-point profile (open chains).
[[nodiscard]] inline CorrelatorSeries correlate(const OccupationMoments& moments,
                                                const std::vector<DiagonalObservable>& ops, std::string sector) {
    const auto& g = moments.geometry;
    if (g.periodic()) return to_chord(connected_correlator(moments, ops, translation_pairs(ops.size(), true), std::move(sector)));
    return one_point_profile(moments.mean, g, ops, std::move(sector));
}

/// The fit a series calls for when none is requested.
[[nodiscard]] inline FitKind default_fit(const CorrelatorSeries& s, const OutcomeSector* sector) {
    if (s.meta.kind != "profile") return FitKind::power_law;
    const bool rx_broken = sector != nullptr && !sector->preserves_bond_reflection;
    return rx_broken ? FitKind::obc_derivative : FitKind::obc_sine;
}

[[nodiscard]] inline FitResult fit_series(CorrelatorSeries s, FitKind kind, const AnalysisConfig& a) {
    if (a.two_cell_average) s = two_cell_average(s);
    switch (kind) {
        case FitKind::power_law: return fit_power_law(s, a.window, a.min_points);
        case FitKind::obc_sine: return fit_obc_sine(s, s.meta.length, a.window, a.min_points);
        case FitKind::obc_derivative: return fit_obc_derivative(s, s.meta.length, a.window, a.min_points, a.axis);
        case FitKind::automatic:
        case FitKind::none: break;
    }
    throw ConfigError("fit kind must be resolved before fitting");
}

// ---------------------------------------------------------------------------
// Pipeline

struct RunReport {
    int exit_code = 0;
    std::string stage;              ///< stage that failed, empty on success
    std::string message;
    std::filesystem::path directory;
    nlohmann::json manifest;
    std::optional<FitResult> fit;
    double probability = 1.0;
    double energy = 0.0;
};

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    os << text;
    if (!os) throw ConfigError("failed writing " + p.string());
}

inline std::string file_digest(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return binary::hex64(binary::fnv1a64(ss.str()));
}

} // namespace detail

/**
 * Run every stage for one configuration. Errors from the library are turned
 * into an error.json file and the matching exit code; the report carries the
 * same information.
 */
[[nodiscard]] inline RunReport run_pipeline(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.directory = cfg.output_dir;
    std::vector<std::string> files;
    nlohmann::json stages = nlohmann::json::object();
    std::string stage = "config";

    auto emit = [&](const std::string& name, const std::string& text) {
        detail::write_text(report.directory / name, text);
        files.push_back(name);
    };

    try {
        cfg.validate();
        fs::create_directories(report.directory);
        fs::remove(report.directory / "error.json");

        stage = "prepare";
        const auto solved = solve_ground_state(cfg.params, cfg.geometry, cfg.solver, cfg.seed);
        report.energy = solved.energy;
        stages["prepare"] = {{"backend", std::string(to_string(solved.backend))},
                             {"energy", solved.energy},
                             {"diagnostics", solved.info}};
        {
            std::ostringstream os(std::ios::binary);
            write_checkpoint(os, solved.state);
            emit("ground_state.bin", os.str());
        }

        stage = "measure";
        std::optional<OutcomeSector> sector;
        if (!cfg.pattern.empty()) sector = expand_pattern(cfg.pattern, cfg.geometry);
        Wavefunction state = solved.state;
        nlohmann::json sector_json{{"pattern", cfg.pattern},
                                   {"measurement", std::string(to_string(cfg.measurement.kind))},
                                   {"beta", cfg.measurement.beta},
                                   {"theta", cfg.measurement.theta}};
        if (sector) {
            sector_json["canonical"] = sector->pattern;
            sector_json["measured_sites"] = sector->sites.size();
            sector_json["period"] = sector->period;
            sector_json["minimal_period"] = sector->minimal_period;
            sector_json["sigma_class"] = std::string(to_string(classify_sector(*sector)));
            sector_json["preserves_bond_reflection"] = sector->preserves_bond_reflection;
        }
        if (cfg.measures()) {
            auto measured = apply_measurement(solved.state, sector ? &*sector : nullptr, cfg.measurement);
            report.probability = measured.probability;
            state = std::move(measured.state);
            std::ostringstream os(std::ios::binary);
            write_checkpoint(os, state);
            emit("measured_state.bin", os.str());
        }
        sector_json["probability"] = report.probability;
        emit("sector.json", sector_json.dump(2) + "\n");

        stage = "correlate";
        const bool post_selected = sector.has_value() && cfg.measurement.kind != MeasurementKind::generalized;
        const auto ops = build_operators(cfg.analysis.op, cfg.geometry, post_selected ? &*sector : nullptr);
        const auto series = correlate(occupation_moments(state), ops, post_selected ? sector->pattern : std::string());
        {
            std::ostringstream os;
            write_csv(os, series);
            emit("correlator.csv", os.str());
            emit("correlator.json", to_json(series.meta).dump(2) + "\n");
        }
        stages["correlate"] = {{"points", series.size()}, {"operators", ops.size()}};

        stage = "fit";
        const FitKind kind = cfg.analysis.fit == FitKind::automatic
                                 ? default_fit(series, post_selected ? &*sector : nullptr)
                                 : cfg.analysis.fit;
        if (kind != FitKind::none) {
            report.fit = fit_series(series, kind, cfg.analysis);
            auto fj = to_json(*report.fit);
            fj["fit"] = std::string(to_string(kind));
            emit("fit.json", fj.dump(2) + "\n");
        }
        stage.clear();
    } catch (const Error& e) {
        report.exit_code = exit_code(e.kind());
        report.stage = stage;
        report.message = e.what();
        try {
            fs::create_directories(report.directory);
            detail::write_text(report.directory / "error.json",
                               nlohmann::json{{"stage", stage},
                                              {"kind", std::string(to_string(e.kind()))},
                                              {"message", e.what()},
                                              {"exit_code", report.exit_code}}
                                       .dump(2) +
                                   "\n");
        } catch (const std::exception&) {
            // The error is still reported through the return value.
        }
        return report;
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& f : files) digests[f] = detail::file_digest(report.directory / f);
    report.manifest = {{"tool", "rydcrit"},
                       {"version", std::string(kVersion)},
                       {"config", to_json(cfg)},
                       {"config_hash", config_hash(cfg)},
                       {"seed", cfg.seed},
                       {"wall_time_s", wall},
                       {"stages", stages},
                       {"files", digests}};
    detail::write_text(report.directory / "manifest.json", report.manifest.dump(2) + "\n");
    return report;
}

} // namespace rydcrit
