// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file test_pipeline.cpp
 * @brief Run configuration parsing, end-to-end runs, artifacts and error reporting.
 */

#include <catch_amalgamated.hpp>

#include <rydcrit/rydcrit.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rydcrit;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rydcrit-pipeline-" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config(const fs::path& dir) {
    return parse_run_config_text(R"({
        "model": "ising",
        "geometry": {"L": 16, "boundary": "periodic"},
        "pattern": "n[2j]=0",
        "output_dir": ")" + dir.string() + R"("
    })");
}

} // namespace

TEST_CASE("run configurations parse strictly", "[pipeline]") {
    const auto c = parse_run_config_text(R"({"model": "tci", "geometry": {"L": 14, "boundary": "open"}})");
    CHECK(c.geometry.length == 14);
    CHECK_FALSE(c.geometry.periodic());
    CHECK(c.params.v2 == critical_preset(CriticalModel::tci, ConstraintMode::hard_blockade).v2);
    CHECK_FALSE(c.measures());

    CHECK_THROWS_AS(parse_run_config_text(R"({"modle": "tci"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text(R"({"geometry": {"L": 12, "size": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text(R"({"solver": {"dmrg": {"chi": 4}}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text(R"({"model": "potts"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text(R"({"model": "custom"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text(R"({"geometry": {"L": "twelve"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text(R"({"pattern": "n[2j]=3"})"), ParseError);
    CHECK_THROWS_AS(parse_run_config_text(R"({"analysis": {"window": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config_text(R"({"measurement": {"kind": "weak", "beta": 1.0}})"), ConfigError);
    try {
        (void)parse_run_config_text(R"({"model": )");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset > 0);
    }

    const auto custom = parse_run_config_text(R"({"model": "custom", "params": {"omega": 1.0, "delta": 0.5, "v2": 0.1}})");
    CHECK(custom.params.delta == 0.5);
    CHECK(custom.params.v2 == 0.1);
}

TEST_CASE("resolved configurations round trip and hash stably", "[pipeline]") {
    const auto a = parse_run_config_text(R"({"model": "ising", "seed": 5, "pattern": "n[4j]=1"})");
    const auto b = parse_run_config_text(R"({"pattern": "n[4j]=1", "seed": 5, "model": "ising"})");
    CHECK(config_hash(a) == config_hash(b));
    const auto again = parse_run_config(to_json(a));
    CHECK(to_json(again) == to_json(a));
    CHECK(config_hash(again) == config_hash(a));
    const auto c = parse_run_config_text(R"({"model": "ising", "seed": 6, "pattern": "n[4j]=1"})");
    CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("default fits follow the geometry and sector", "[pipeline]") {
    CorrelatorSeries ring;
    ring.meta.kind = "connected";
    CHECK(default_fit(ring, nullptr) == FitKind::power_law);
    CorrelatorSeries prof;
    prof.meta.kind = "profile";
    CHECK(default_fit(prof, nullptr) == FitKind::obc_sine);
    const ChainGeometry g{21, Boundary::open, ConstraintMode::hard_blockade};
    const auto kept = expand_pattern("n[3j]=0,n[3j+1]=0", g);
    CHECK(kept.preserves_bond_reflection);
    CHECK(default_fit(prof, &kept) == FitKind::obc_sine);
    const auto broken = expand_pattern("n[2j]=0", g);
    CHECK_FALSE(broken.preserves_bond_reflection);
    CHECK(default_fit(prof, &broken) == FitKind::obc_derivative);
}

TEST_CASE("pipeline writes reproducible artifacts", "[pipeline]") {
    const auto dir = scratch_dir("ok");
    const auto cfg = small_config(dir);
    const auto r = run_pipeline(cfg);
    REQUIRE(r.exit_code == 0);
    for (const char* f : {"ground_state.bin", "measured_state.bin", "sector.json", "correlator.csv", "correlator.json",
                          "fit.json", "manifest.json"})
        CHECK(fs::exists(dir / f));
    CHECK_FALSE(fs::exists(dir / "error.json"));
    REQUIRE(r.fit.has_value());

    // The run agrees with the library pieces it strings together.
    const auto basis = make_basis(cfg.geometry);
    const auto gs = ground_state_auto(build_hamiltonian(cfg.params, cfg.geometry, *basis), basis);
    const auto sec = expand_pattern(cfg.pattern, cfg.geometry);
    CHECK_THAT(r.probability, WithinAbs(sector_probability(gs.state, sec), 1e-10));
    CHECK_THAT(r.energy, WithinAbs(gs.energy, 1e-9));
    const auto sector = nlohmann::json::parse(slurp(dir / "sector.json"));
    CHECK(sector.at("canonical") == "n[2j]=0");
    CHECK(sector.at("sigma_class") == std::string(to_string(classify_sector(sec))));
    CHECK(r.manifest.at("config_hash") == config_hash(cfg));
    CHECK(r.manifest.at("files").contains("fit.json"));

    auto manifest_without_time = [&] {
        auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
        m.erase("wall_time_s");
        return m;
    };
    const auto first = manifest_without_time();
    const auto first_csv = slurp(dir / "correlator.csv");
    const auto first_state = slurp(dir / "measured_state.bin");
    const auto r2 = run_pipeline(cfg);
    REQUIRE(r2.exit_code == 0);
    CHECK(manifest_without_time() == first);
    CHECK(slurp(dir / "correlator.csv") == first_csv);
    CHECK(slurp(dir / "measured_state.bin") == first_state);

    // Stored states reload into the same correlator.
    std::ifstream in(dir / "measured_state.bin", std::ios::binary);
    const auto psi = read_wavefunction(in);
    const auto ops = build_sigma_n(sec);
    const auto series = correlate(occupation_moments(psi), ops, sec.pattern);
    std::ostringstream csv;
    write_csv(csv, series);
    CHECK(csv.str() == first_csv);
    fs::remove_all(dir);
}

TEST_CASE("pipeline failures produce error.json and exit codes", "[pipeline]") {
    SECTION("zero-probability sector") {
        const auto dir = scratch_dir("zero");
        auto cfg = parse_run_config_text(R"({"model": "custom", "params": {"omega": 1e-9, "delta": -1.0},
                                        "geometry": {"L": 12}, "pattern": "n[4j]=1"})");
        cfg.output_dir = dir.string();
        const auto r = run_pipeline(cfg);
        CHECK(r.exit_code == 4);
        CHECK(r.stage == "measure");
        const auto err = nlohmann::json::parse(slurp(dir / "error.json"));
        CHECK(err.at("kind") == "zero_probability");
        CHECK(err.at("exit_code") == 4);
        CHECK_FALSE(fs::exists(dir / "manifest.json"));
        fs::remove_all(dir);
    }
    SECTION("invalid pattern") {
        const auto dir = scratch_dir("parse");
        auto cfg = small_config(dir);
        cfg.pattern = "n[2j]=0;";
        const auto r = run_pipeline(cfg);
        CHECK(r.exit_code == 2);
        CHECK(r.stage == "config");
        CHECK(fs::exists(dir / "error.json"));
        fs::remove_all(dir);
    }
    SECTION("fit with too few points") {
        const auto dir = scratch_dir("fit");
        auto cfg = small_config(dir);
        cfg.analysis.min_points = 50;
        const auto r = run_pipeline(cfg);
        CHECK(r.exit_code == 5);
        CHECK(r.stage == "fit");
        CHECK(fs::exists(dir / "correlator.csv"));
        fs::remove_all(dir);
    }
    SECTION("basis too large") {
        const auto dir = scratch_dir("capacity");
        auto cfg = small_config(dir);
        cfg.geometry.mode = ConstraintMode::penalty;
        cfg.geometry.length = 24;
        cfg.params = critical_preset(CriticalModel::ising, ConstraintMode::penalty);
        cfg.solver.backend = SolverBackend::dense;
        const auto r = run_pipeline(cfg);
        CHECK(r.exit_code == 2);
        CHECK(r.stage == "prepare");
        fs::remove_all(dir);
    }
}
