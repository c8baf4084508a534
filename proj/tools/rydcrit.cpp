// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file rydcrit.cpp
 * @brief Command-line front end: prepare, measure, correlate, fit and sample.
 *
 * Summaries are JSON on stdout and tables go to the file named by --csv.
 * Failures print a JSON error object on stderr and exit with 2 (config),
 * 3 (solver), 4 (zero probability) or 5 (fit).
 */

#include <rydcrit/rydcrit.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace rydcrit;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Option groups shared by several subcommands

struct ModelOptions {
    std::string model = "ising";
    std::optional<double> omega, delta, v1, v2;
    bool edge_shift = false;

    void add(CLI::App* app) {
        app->add_option("--model", model, "Critical preset: ising, tci or custom")
            ->check(CLI::IsMember({"ising", "tci", "custom"}));
        app->add_option("--omega", omega, "Rabi frequency (overrides the preset)");
        app->add_option("--delta", delta, "Detuning (overrides the preset)");
        app->add_option("--v1", v1, "Nearest-neighbour interaction (penalty mode)");
        app->add_option("--v2", v2, "Next-nearest-neighbour interaction");
        app->add_flag("--edge-shift", edge_shift, "Open chains: detuning Delta - V2 on the first and last site");
    }

    [[nodiscard]] HamiltonianParams resolve(ConstraintMode mode) const {
        HamiltonianParams p;
        if (model != "custom") p = critical_preset(parse_model(model), mode);
        else if (!delta) throw ConfigError("--model custom needs at least --delta");
        if (omega) p.omega = *omega;
        if (delta) p.delta = *delta;
        if (v1) p.v1 = *v1;
        if (v2) p.v2 = *v2;
        p.edge_detuning_shift = edge_shift;
        p.validate();
        return p;
    }
};

struct GeometryOptions {
    int length = 16;
    std::string boundary = "periodic";
    std::string constraint = "hard";

    void add(CLI::App* app, bool with_length = true) {
        if (with_length) app->add_option("-L,--length", length, "Chain length");
        app->add_option("--boundary", boundary, "periodic or open");
        app->add_option("--constraint", constraint, "hard (exact blockade) or penalty (finite V1)");
    }
    [[nodiscard]] ChainGeometry resolve(int L) const {
        ChainGeometry g{L, parse_boundary(boundary), parse_constraint(constraint)};
        g.validate();
        return g;
    }
    [[nodiscard]] ChainGeometry resolve() const { return resolve(length); }
};

struct SolverOptions {
    std::string backend = "auto";
    int chi_max = 128;
    double cutoff = 1e-10;
    int max_sweeps = 40;
    double tol = 1e-10;

    void add(CLI::App* app) {
        app->add_option("--backend", backend, "auto, dense, lanczos or dmrg");
        app->add_option("--chi", chi_max, "DMRG bond-dimension cap");
        app->add_option("--cutoff", cutoff, "DMRG truncation cutoff (relative discarded weight)");
        app->add_option("--max-sweeps", max_sweeps, "DMRG sweep limit");
        app->add_option("--tol", tol, "Lanczos residual tolerance");
    }
    [[nodiscard]] SolverConfig resolve() const {
        SolverConfig c;
        c.backend = parse_backend(backend);
        c.dmrg.chi_max = chi_max;
        c.dmrg.truncation_cutoff = cutoff;
        c.dmrg.max_sweeps = max_sweeps;
        c.exact.tol = tol;
        return c;
    }
};

// ---------------------------------------------------------------------------
// Parsing helpers

/// "a,b,c", "a..b" or "a..b:step".
std::vector<int> parse_sizes(const std::string& text) {
    std::vector<int> out;
    try {
        const auto dots = text.find("..");
        if (dots != std::string::npos) {
            const auto colon = text.find(':', dots);
            const int lo = std::stoi(text.substr(0, dots));
            const int hi = std::stoi(text.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
            const int step = colon == std::string::npos ? 1 : std::stoi(text.substr(colon + 1));
            if (step <= 0) throw ConfigError("size step must be positive");
            for (int L = lo; L <= hi; L += step) out.push_back(L);
        } else {
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
        }
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse size list '" + text + "'");
    }
    if (out.empty()) throw ConfigError("size list '" + text + "' is empty");
    return out;
}

/// "lo:hi:step" (both ends included when hi lies on the grid) or "a,b,c".
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    try {
        if (std::count(text.begin(), text.end(), ':') == 2) {
            const auto c1 = text.find(':');
            const auto c2 = text.find(':', c1 + 1);
            const double lo = std::stod(text.substr(0, c1));
            const double hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
            const double step = std::stod(text.substr(c2 + 1));
            if (!(step > 0.0) || hi < lo) throw ConfigError("grid '" + text + "' needs lo <= hi and step > 0");
            const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
            for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
        } else {
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
        }
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse grid '" + text + "'");
    }
    if (out.size() < 2) throw ConfigError("grid '" + text + "' needs at least two points");
    return out;
}

Wavefunction load_state(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open state checkpoint '" + path + "'");
    return read_wavefunction(is);
}

void save_state(const std::string& path, const Wavefunction& psi) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    write_checkpoint(os, psi);
}

/// Run `body` with the stream named by `path`, or stdout when it is empty.
template <class Body>
void with_output(const std::string& path, Body&& body) {
    if (path.empty() || path == "-") {
        body(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    body(os);
}

json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    try {
        return json::parse(ss.str(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what(), e.byte);
    }
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

void configure_threads() {
#if defined(_OPENMP)
    if (const char* env = std::getenv("RYDCRIT_NUM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

} // namespace

int main(int argc, char** argv) {
    configure_threads();
    CLI::App app{"rydcrit: measurement-altered criticality in Rydberg chains"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // basis -----------------------------------------------------------------
    GeometryOptions basis_geo;
    bool basis_dump = false;
    auto* basis = app.add_subcommand("basis", "Dimension of the blockaded basis");
    basis_geo.add(basis);
    basis->add_flag("--dump", basis_dump, "Print every configuration, one per line");

    // ground ----------------------------------------------------------------
    ModelOptions ground_model;
    GeometryOptions ground_geo;
    SolverOptions ground_solver;
    std::string ground_out;
    std::uint64_t ground_seed = 1;
    auto* ground = app.add_subcommand("ground", "Solve for the ground state and write a checkpoint");
    ground_model.add(ground);
    ground_geo.add(ground);
    ground_solver.add(ground);
    ground->add_option("-o,--out", ground_out, "Checkpoint path")->required();
    ground->add_option("--seed", ground_seed, "Seed for the iterative solvers");

    // critical-point --------------------------------------------------------
    ModelOptions cp_model;
    std::string cp_constraint = "hard", cp_sizes = "11,15,19,23", cp_grid = "0.60:0.72:0.005", cp_csv;
    auto* cp = app.add_subcommand("critical-point", "Detuning scan of odd open chains and curve crossing");
    cp_model.add(cp);
    cp->add_option("--constraint", cp_constraint, "hard or penalty");
    cp->add_option("--sizes", cp_sizes, "Odd chain lengths");
    cp->add_option("--grid", cp_grid, "Detuning grid lo:hi:step");
    cp->add_option("--csv", cp_csv, "Write the curve family here");

    // measure ---------------------------------------------------------------
    std::string ms_state, ms_out, ms_pattern, ms_kind = "projective";
    double ms_beta = 0.0, ms_theta = 0.0;
    auto* ms = app.add_subcommand("measure", "Apply a projective, weak or generalized measurement");
    ms->add_option("--state", ms_state, "Input checkpoint")->required();
    ms->add_option("-o,--out", ms_out, "Output checkpoint")->required();
    ms->add_option("--pattern", ms_pattern, "Measurement pattern, e.g. n[2j]=0");
    ms->add_option("--kind", ms_kind, "projective, weak or generalized");
    ms->add_option("--beta", ms_beta, "Measurement strength");
    ms->add_option("--theta", ms_theta, "Generalized measurement angle (radians)");

    // prob ------------------------------------------------------------------
    ModelOptions pr_model;
    GeometryOptions pr_geo;
    std::string pr_pattern, pr_sizes = "8..28:2", pr_state, pr_csv;
    double pr_extrapolate = 100.0;
    auto* pr = app.add_subcommand("prob", "Post-selection probabilities, conditionals and the decay with L");
    pr_model.add(pr);
    pr_geo.add(pr, false);
    pr->add_option("--pattern", pr_pattern, "Measurement pattern")->required();
    pr->add_option("--sizes", pr_sizes, "Chain lengths for the decay table");
    pr->add_option("--state", pr_state, "Report P_n and conditionals of this checkpoint instead");
    pr->add_option("--extrapolate", pr_extrapolate, "Length at which to evaluate the decay fit");
    pr->add_option("--csv", pr_csv, "Write the L,P table here");

    // correlate -------------------------------------------------------------
    std::string co_state, co_pattern, co_operator = "sigma", co_csv;
    auto* co = app.add_subcommand("correlate", "Connected correlators (rings) or one-point profiles (open chains)");
    co->add_option("--state", co_state, "Checkpoint, already measured when --pattern is given")->required();
    co->add_option("--pattern", co_pattern, "Sector that selects the post-measurement operators");
    co->add_option("--operator", co_operator, "sigma, epsilon or epsilon_z2");
    co->add_option("--csv", co_csv, "Series CSV path; a .json metadata file is written next to it")->required();

    // fit -------------------------------------------------------------------
    std::string fit_csv, fit_meta, fit_kind = "auto", fit_axis = "x";
    double fit_window = 0.8;
    std::size_t fit_min = 4;
    bool fit_avg = false;
    auto* fit = app.add_subcommand("fit", "Fit a scaling dimension to a correlator series");
    fit->add_option("--csv", fit_csv, "Series CSV")->required();
    fit->add_option("--meta", fit_meta, "Metadata JSON (default: CSV path with .json)");
    fit->add_option("--fit", fit_kind, "auto, power_law, obc_sine or obc_derivative");
    fit->add_option("--window", fit_window, "Fraction of points kept");
    fit->add_option("--min-points", fit_min, "Minimum number of points in the window");
    fit->add_option("--axis", fit_axis, "Derivative-fit abscissa: x or sine");
    fit->add_flag("--two-cell-average", fit_avg, "Average adjacent points before fitting");

    // sweep-theta -----------------------------------------------------------
    std::string st_sizes = "12,16,20,24", st_grid = "0.15:0.25:0.0025", st_csv;
    double st_beta = 1.0;
    auto* st = app.add_subcommand("sweep-theta", "Generalized-measurement sweep on periodic TCI chains");
    st->add_option("--beta", st_beta, "Measurement strength");
    st->add_option("--sizes", st_sizes, "Even ring lengths");
    st->add_option("--grid", st_grid, "theta grid in units of pi, lo:hi:step");
    st->add_option("--csv", st_csv, "Write the curve family here");

    // sample ----------------------------------------------------------------
    std::string sa_state, sa_out;
    std::size_t sa_shots = 10000;
    std::uint64_t sa_seed = 1;
    auto* sa = app.add_subcommand("sample", "Draw Born-rule snapshots of the whole chain");
    sa->add_option("--state", sa_state, "Checkpoint to sample")->required();
    sa->add_option("-n,--shots", sa_shots, "Number of shots");
    sa->add_option("--seed", sa_seed, "Sampling seed");
    sa->add_option("-o,--out", sa_out, "Shot file; the sidecar is written to <out>.json")->required();

    // estimate --------------------------------------------------------------
    std::string es_shots, es_sidecar, es_pattern, es_operator = "sigma", es_csv;
    std::size_t es_floor = kMinRetainedShots;
    auto* es = app.add_subcommand("estimate", "Restricted averaging over shots compatible with a sector");
    es->add_option("--shots", es_shots, "Shot file")->required();
    es->add_option("--sidecar", es_sidecar, "Sidecar JSON (default: <shots>.json)");
    es->add_option("--pattern", es_pattern, "Post-selection pattern (empty: no filtering)");
    es->add_option("--operator", es_operator, "sigma, epsilon or epsilon_z2");
    es->add_option("--min-shots", es_floor, "Minimum number of retained shots");
    es->add_option("--csv", es_csv, "Series CSV path; a .json metadata file is written next to it")->required();

    // run -------------------------------------------------------------------
    std::string rn_config, rn_out, rn_pattern;
    std::optional<std::uint64_t> rn_seed;
    std::optional<int> rn_length;
    auto* rn = app.add_subcommand("run", "Run the full pipeline from a JSON config; flags override the file");
    rn->add_option("-c,--config", rn_config, "Config JSON")->required();
    rn->add_option("-o,--output-dir", rn_out, "Output directory");
    rn->add_option("--pattern", rn_pattern, "Measurement pattern");
    rn->add_option("--seed", rn_seed, "Seed");
    rn->add_option("-L,--length", rn_length, "Chain length");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*basis) {
            const auto g = basis_geo.resolve();
            const auto b = make_basis(g);
            if (basis_dump) b->dump(std::cout);
            else print({{"L", g.length},
                        {"boundary", std::string(to_string(g.boundary))},
                        {"constraint", std::string(to_string(g.mode))},
                        {"dimension", b->dimension()},
                        {"expected", expected_dimension(g)}});
        } else if (*ground) {
            const auto g = ground_geo.resolve();
            const auto r = solve_ground_state(ground_model.resolve(g.mode), g, ground_solver.resolve(), ground_seed);
            save_state(ground_out, r.state);
            print({{"energy", r.energy},
                   {"backend", std::string(to_string(r.backend))},
                   {"state_id", state_id(r.state)},
                   {"checkpoint", ground_out},
                   {"diagnostics", r.info}});
        } else if (*cp) {
            const auto mode = parse_constraint(cp_constraint);
            const auto family = scan_detuning(parse_sizes(cp_sizes), parse_grid(cp_grid), cp_model.resolve(mode), mode);
            if (!cp_csv.empty()) with_output(cp_csv, [&](std::ostream& os) { write_csv(os, family); });
            print(to_json(find_curve_crossing(family)));
        } else if (*ms) {
            const auto psi = load_state(ms_state);
            MeasurementSpec spec{parse_measurement_kind(ms_kind), ms_beta, ms_theta};
            std::optional<OutcomeSector> sector;
            if (!ms_pattern.empty()) sector = expand_pattern(ms_pattern, geometry_of(psi));
            const auto out = apply_measurement(psi, sector ? &*sector : nullptr, spec);
            save_state(ms_out, out.state);
            json j{{"kind", ms_kind}, {"beta", ms_beta}, {"theta", ms_theta}, {"probability", out.probability},
                   {"checkpoint", ms_out}};
            if (sector) {
                j["pattern"] = sector->pattern;
                j["sigma_class"] = std::string(to_string(classify_sector(*sector)));
            }
            print(j);
        } else if (*pr) {
            if (!pr_state.empty()) {
                const auto psi = load_state(pr_state);
                const auto sector = expand_pattern(pr_pattern, geometry_of(psi));
                const auto cond = conditional_probabilities(psi, sector);
                json j{{"pattern", sector.pattern}, {"probability", sector_probability(psi, sector)},
                       {"conditionals", cond.values}};
                if (cond.zero_prefix_at) j["zero_prefix_at"] = *cond.zero_prefix_at;
                print(j);
            } else {
                std::vector<std::pair<int, double>> table;
                double density = 0.0;
                for (const int L : parse_sizes(pr_sizes)) {
                    const auto g = pr_geo.resolve(L);
                    const auto pattern = parse_pattern(pr_pattern);
                    if (g.periodic() && L % pattern.period() != 0) {
                        std::cerr << "skipping L=" << L << ": period " << pattern.period() << " does not divide it\n";
                        continue;
                    }
                    const auto sector = expand_pattern(pattern, g);
                    const auto r = solve_ground_state(pr_model.resolve(g.mode), g, SolverConfig{}, 1);
                    table.emplace_back(L, sector_probability(r.state, sector));
                    density = sector.density();
                }
                if (!pr_csv.empty())
                    with_output(pr_csv, [&](std::ostream& os) {
                        os.precision(17);
                        os << "L,P\n";
                        for (const auto& [L, p] : table) os << L << ',' << p << '\n';
                    });
                json j{{"pattern", pr_pattern}, {"table", table}};
                if (table.size() >= 4) {
                    const auto f = fit_probability_decay(table, density);
                    j["fit"] = to_json(f.fit);
                    j["decay"] = f.decay();
                    j["xi"] = f.xi();
                    j["extrapolate_L"] = pr_extrapolate;
                    j["extrapolated_probability"] = f.extrapolate(pr_extrapolate);
                }
                print(j);
            }
        } else if (*co) {
            const auto psi = load_state(co_state);
            const auto& g = geometry_of(psi);
            std::optional<OutcomeSector> sector;
            if (!co_pattern.empty()) sector = expand_pattern(co_pattern, g);
            if (sector) {
                const double p = sector_probability(psi, *sector);
                if (std::abs(p - 1.0) > 1e-8)
                    throw ConfigError("state is not inside sector " + sector->pattern + " (weight " +
                                      std::to_string(p) + "); run `measure` first");
            }
            const auto ops = build_operators(parse_operator_kind(co_operator), g, sector ? &*sector : nullptr);
            const auto series = correlate(occupation_moments(psi), ops, sector ? sector->pattern : std::string());
            with_output(co_csv, [&](std::ostream& os) { write_csv(os, series); });
            with_output(co_csv + ".json", [&](std::ostream& os) { os << to_json(series.meta).dump(2) << '\n'; });
            print({{"points", series.size()}, {"csv", co_csv}, {"meta", to_json(series.meta)}});
        } else if (*fit) {
            std::ifstream is(fit_csv);
            if (!is) throw ConfigError("cannot open '" + fit_csv + "'");
            CorrelatorSeries s;
            s.points = read_csv_points(is);
            s.meta = series_meta_from_json(read_json_file(fit_meta.empty() ? fit_csv + ".json" : fit_meta));
            AnalysisConfig a;
            a.window = fit_window;
            a.min_points = fit_min;
            a.two_cell_average = fit_avg;
            a.axis = parse_derivative_axis(fit_axis);
            FitKind kind = parse_fit_kind(fit_kind);
            if (kind == FitKind::automatic) kind = s.meta.kind == "profile" ? FitKind::obc_sine : FitKind::power_law;
            if (kind == FitKind::none) throw ConfigError("--fit none has nothing to do");
            auto j = to_json(fit_series(s, kind, a));
            j["fit"] = std::string(to_string(kind));
            print(j);
        } else if (*st) {
            std::vector<DenseState> states;
            for (const int L : parse_sizes(st_sizes)) {
                const ChainGeometry g{L, Boundary::periodic, ConstraintMode::hard_blockade};
                const auto r = solve_ground_state(critical_preset(CriticalModel::tci, g.mode), g, SolverConfig{}, 1);
                states.push_back(std::get<DenseState>(r.state));
            }
            auto grid = parse_grid(st_grid);
            for (auto& t : grid) t *= std::numbers::pi;
            auto family = sweep_theta(states, st_beta, grid);
            for (auto& t : family.grid) t /= std::numbers::pi;
            family.abscissa = "theta/pi";
            if (!st_csv.empty()) with_output(st_csv, [&](std::ostream& os) { write_csv(os, family); });
            auto j = to_json(find_curve_crossing(family));
            j["beta"] = st_beta;
            j["units"] = "pi";
            print(j);
        } else if (*sa) {
            const auto psi = load_state(sa_state);
            const auto shots = sample_shots(psi, sa_shots, sa_seed);
            with_output(sa_out, [&](std::ostream& os) { write_shots(os, shots); });
            with_output(sa_out + ".json", [&](std::ostream& os) { os << sidecar_json(shots).dump(2) << '\n'; });
            print(sidecar_json(shots));
        } else if (*es) {
            std::ifstream is(es_shots);
            if (!is) throw ConfigError("cannot open '" + es_shots + "'");
            auto shots = read_shots(is, read_json_file(es_sidecar.empty() ? es_shots + ".json" : es_sidecar));
            std::optional<OutcomeSector> sector;
            if (!es_pattern.empty()) {
                sector = expand_pattern(es_pattern, shots.geometry);
                shots = filter_sector(shots, *sector);
            }
            const auto ops = build_operators(parse_operator_kind(es_operator), shots.geometry, sector ? &*sector : nullptr);
            CorrelatorSeries series;
            if (shots.geometry.periodic())
                series = to_chord(estimate_connected(shots, ops, translation_pairs(ops.size(), true), es_floor));
            else
                series = estimate_profile(shots, ops);
            with_output(es_csv, [&](std::ostream& os) { write_csv(os, series); });
            with_output(es_csv + ".json", [&](std::ostream& os) { os << to_json(series.meta).dump(2) << '\n'; });
            print({{"retained", shots.size()}, {"total", shots.parent_count}, {"retention", shots.retention()},
                   {"points", series.size()}, {"csv", es_csv}});
        } else if (*rn) {
            auto j = read_json_file(rn_config);
            if (!rn_out.empty()) j["output_dir"] = rn_out;
            if (!rn_pattern.empty()) j["pattern"] = rn_pattern;
            if (rn_seed) j["seed"] = *rn_seed;
            if (rn_length) j["geometry"]["L"] = *rn_length;
            const auto cfg = parse_run_config(j);
            const auto report = run_pipeline(cfg);
            if (report.exit_code != 0) {
                std::cerr << json{{"stage", report.stage}, {"message", report.message}, {"exit_code", report.exit_code}}
                                 .dump()
                          << '\n';
                return report.exit_code;
            }
            json out{{"output_dir", report.directory.string()}, {"energy", report.energy},
                     {"probability", report.probability}, {"config_hash", config_hash(cfg)}};
            if (report.fit) out["fit"] = to_json(*report.fit);
            print(out);
        }
    } catch (const Error& e) {
        std::cerr << json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << '\n';
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
