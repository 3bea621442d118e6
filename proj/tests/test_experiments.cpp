#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "ergo/experiments.hpp"

using namespace ergo;
using Catch::Approx;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text, std::vector<std::string>* header) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.push_back("");
        if (!have_header) {
            if (header) *header = cells;
            have_header = true;
        } else {
            rows.push_back(std::move(cells));
        }
    }
    return rows;
}

double cell(const std::vector<std::string>& row, std::size_t i) { return std::stod(row[i]); }

}  // namespace

TEST_CASE("key-value config parsing", "[experiments]") {
    SECTION("values, comments, whitespace") {
        KeyValueConfig cfg = KeyValueConfig::parse_string("a = 1.5\n# comment\n b= text # trailing\nflag=true\n");
        CHECK(cfg.get_double("a", 0) == 1.5);
        CHECK(cfg.get_string("b", "") == "text");
        CHECK(cfg.get_bool("flag", false));
        CHECK_NOTHROW(cfg.finish());
    }
    SECTION("unknown keys rejected with line info") {
        KeyValueConfig cfg = KeyValueConfig::parse_string("known = 1\nmystery = 2\n");
        cfg.get_double("known", 0);
        try {
            cfg.finish();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("mystery") != std::string::npos);
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SECTION("malformed input rejected") {
        CHECK_THROWS_AS(KeyValueConfig::parse_string("novalue\n"), ConfigError);
        CHECK_THROWS_AS(KeyValueConfig::parse_string("a=1\na=2\n"), ConfigError);
        KeyValueConfig cfg = KeyValueConfig::parse_string("x = notanumber\n");
        CHECK_THROWS_AS(cfg.get_double("x", 0), ConfigError);
    }
}

TEST_CASE("relax experiment", "[experiments]") {
    KeyValueConfig cfg = KeyValueConfig::parse_string("r = 0.5\nt_final = 5\nfock_dim = 30\npoints_note = x");
    cfg.set("points_note", "x");  // exercise the unknown-key rejection path
    CHECK_THROWS_AS(run_experiment("relax", cfg), ConfigError);

    KeyValueConfig good = KeyValueConfig::parse_string("r = 0.5\nt_final = 5\nfock_dim = 30\n");
    ExperimentResult res = run_experiment("relax", good);
    std::vector<std::string> header;
    auto rows = parse_csv(res.csv, &header);
    REQUIRE(header.size() == 7);
    CHECK(header[0] == "t");
    CHECK(header[6] == "flags");
    REQUIRE(rows.size() >= 100);
    // monotone energy rise toward sinh^2(r) * omega
    double target = std::sinh(0.5) * std::sinh(0.5);
    double prev = -1.0;
    for (const auto& row : rows) {
        double energy = cell(row, 1);
        CHECK(energy >= prev - 1e-9);
        prev = energy;
    }
    CHECK(cell(rows.back(), 1) == Approx(target).epsilon(1e-4));
    // vacuum stays pure at the end: entropy returns near zero
    CHECK(cell(rows.back(), 4) < 2e-3);
    CHECK(res.manifest["experiment"] == "relax");

    SECTION("r = 0 keeps the ergotropy column at zero") {
        KeyValueConfig cfg0 =
            KeyValueConfig::parse_string("r = 0\nt_final = 4\nfock_dim = 25\ninitial = thermal:0.3\n");
        ExperimentResult thermal = run_experiment("relax", cfg0);
        for (const auto& row : parse_csv(thermal.csv, nullptr)) CHECK(cell(row, 3) <= 1e-10);
    }
    SECTION("byte-identical rerun") {
        KeyValueConfig again = KeyValueConfig::parse_string("r = 0.5\nt_final = 5\nfock_dim = 30\n");
        ExperimentResult rerun = run_experiment("relax", again);
        CHECK(rerun.csv == res.csv);
        Json a = res.manifest, b = rerun.manifest;
        a.erase("wall_time_s");
        b.erase("wall_time_s");
        CHECK(a == b);
    }
}

TEST_CASE("otto experiment sweep", "[experiments]") {
    KeyValueConfig cfg;
    apply_preset(cfg, "fig5a");
    ExperimentResult res = run_experiment("otto", cfg);
    std::vector<std::string> header;
    auto rows = parse_csv(res.csv, &header);
    REQUIRE(rows.size() == 20);
    bool sigma_above_one = false;
    for (const auto& row : rows) {
        int regime = static_cast<int>(cell(row, 5));
        if (regime == static_cast<int>(Regime::engine)) {
            CHECK(cell(row, 1) <= cell(row, 2) + 1e-9);                 // eta <= eta_max
            CHECK(cell(row, 2) <= 1.0 + 1e-9);                          // eta_max <= 1
            CHECK(cell(row, 2) <= cell(row, 3) + 1e-9);                 // eta_max <= eta_sigma
            if (cell(row, 3) > 1.0) sigma_above_one = true;
        } else {
            CHECK(cell(row, 1) == 1.0);
            CHECK(row[6].find("bounds_not_applicable") != std::string::npos);
        }
    }
    CHECK(sigma_above_one);

    SECTION("fig5b r-sweep stays in the engine regime") {
        KeyValueConfig cfg_b;
        apply_preset(cfg_b, "fig5b");
        ExperimentResult res_b = run_experiment("otto", cfg_b);
        auto rows_b = parse_csv(res_b.csv, nullptr);
        REQUIRE(rows_b.size() == 21);
        double prev_eta_max = 0.0;
        for (const auto& row : rows_b) {
            CHECK(static_cast<int>(cell(row, 5)) == static_cast<int>(Regime::engine));
            CHECK(cell(row, 2) >= prev_eta_max - 1e-12);  // eta_max non-decreasing in r
            prev_eta_max = cell(row, 2);
        }
    }
    SECTION("single-point mode") {
        KeyValueConfig single = KeyValueConfig::parse_string("sweep = none\nratio = 0.5\nr = 0.3\n");
        ExperimentResult one = run_experiment("otto", single);
        CHECK(parse_csv(one.csv, nullptr).size() == 1);
    }
}

TEST_CASE("carnot experiment curves", "[experiments]") {
    KeyValueConfig cfg = KeyValueConfig::parse_string("duration = 30\nfock_dim = 30\nstore_every = 0.25\n");
    apply_preset(cfg, "fig8");
    ExperimentResult res = run_experiment("carnot", cfg);
    auto rows = parse_csv(res.csv, nullptr);
    REQUIRE(rows.size() >= 100);
    // delta_S grows along the stroke; the tight bound approaches it while the
    // dissipated-energy curve overshoots it early (squeezing energy intake)
    const auto& last = rows.back();
    CHECK(cell(last, 1) > 0.0);
    CHECK(cell(last, 3) <= cell(last, 1));
    CHECK(cell(last, 1) - cell(last, 3) < 0.2 * cell(last, 1));
    CHECK(cell(last, 2) > cell(last, 1));  // E_d/T far above Delta S for the squeezed stroke
    CHECK_FALSE(res.manifest["flags"]["slow_driving_violated"].get<bool>());
}

TEST_CASE("catalysis experiment panels", "[experiments]") {
    SECTION("panel a: power ordering across the frequency sweep") {
        KeyValueConfig cfg = KeyValueConfig::parse_string("panel = a\npoints = 24\nnu_min = 0.8\nnu_max = 2.8\n");
        apply_preset(cfg, "fig7");
        ExperimentResult res = run_experiment("catalysis", cfg);
        auto rows = parse_csv(res.csv, nullptr);
        REQUIRE(rows.size() == 24);
        for (const auto& row : rows) {
            CHECK(cell(row, 3) > cell(row, 2));  // quadratic > linear
            CHECK(cell(row, 2) > cell(row, 1));  // linear > none
            CHECK(cell(row, 4) <= 1e-8);         // identity residual
        }
    }
    SECTION("panel b: pumped efficiency dominates and stays below eta_max_ref") {
        KeyValueConfig cfg = KeyValueConfig::parse_string("panel = b\npoints = 40\nt_max_gamma = 5\n");
        apply_preset(cfg, "fig7");
        ExperimentResult res = run_experiment("catalysis", cfg);
        auto rows = parse_csv(res.csv, nullptr);
        for (const auto& row : rows) {
            CHECK(cell(row, 1) >= cell(row, 2) - 1e-9);
            CHECK(cell(row, 1) <= cell(row, 3) + 1e-9);
        }
    }
    SECTION("panel c: ergotropy ratios ordered") {
        KeyValueConfig cfg = KeyValueConfig::parse_string("panel = c\npoints = 40\n");
        apply_preset(cfg, "fig7");
        ExperimentResult res = run_experiment("catalysis", cfg);
        auto rows = parse_csv(res.csv, nullptr);
        for (std::size_t i = rows.size() / 5; i < rows.size(); ++i) {
            CHECK(cell(rows[i], 1) > cell(rows[i], 2));
            CHECK(cell(rows[i], 2) > cell(rows[i], 3));
        }
    }
    SECTION("degenerate kappa = 0 run") {
        KeyValueConfig cfg = KeyValueConfig::parse_string("panel = b\nkappa_over_gamma = 0\npoints = 10\n");
        apply_preset(cfg, "fig7");
        ExperimentResult res = run_experiment("catalysis", cfg);
        auto rows = parse_csv(res.csv, nullptr);
        for (const auto& row : rows) CHECK(cell(row, 1) == Approx(cell(row, 2)).margin(1e-12));
    }
}

TEST_CASE("bounds experiment", "[experiments]") {
    SECTION("qubit inverted-population relaxation") {
        KeyValueConfig cfg = KeyValueConfig::parse_string(
            "system = qubit\nomega = 1.5\ntemperature = 0.8\ninitial = inverted:0.9\nt_final = 14\n");
        ExperimentResult res = run_experiment("bounds", cfg);
        auto rows = parse_csv(res.csv, nullptr);
        const auto& last = rows.back();
        CHECK(cell(last, 1) >= cell(last, 3) - 1e-8);  // delta_S >= tight bound
        CHECK(cell(last, 3) >= cell(last, 2) - 1e-12); // tight >= second-law for thermal relaxation
        for (const auto& row : rows) CHECK(cell(row, 4) >= -1e-9);  // sigma >= 0
    }
    SECTION("passive start: bounds coincide") {
        KeyValueConfig cfg = KeyValueConfig::parse_string(
            "system = oscillator\ninitial = thermal:0.2\ntemperature = 1.0\nt_final = 12\nfock_dim = 25\n");
        ExperimentResult res = run_experiment("bounds", cfg);
        auto rows = parse_csv(res.csv, nullptr);
        for (const auto& row : rows) CHECK(cell(row, 2) == Approx(cell(row, 3)).margin(1e-8));
    }
    SECTION("squeezed bath emits the passive-pair comparison") {
        KeyValueConfig cfg = KeyValueConfig::parse_string(
            "system = oscillator\nr = 0.3\ntemperature = 1.2\nt_final = 12\nfock_dim = 30\n");
        ExperimentResult res = run_experiment("bounds", cfg);
        REQUIRE(res.manifest.contains("passive_pair"));
        double lhs = res.manifest["passive_pair"]["s_pi0_pi_ss"].get<double>();
        double rhs = res.manifest["passive_pair"]["s_rho_tilde_pi_ss"].get<double>();
        CHECK(lhs >= 0.0);
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("presets map to experiments", "[experiments]") {
    CHECK(preset_experiment("fig5a") == "otto");
    CHECK(preset_experiment("fig6") == "relax");
    CHECK(preset_experiment("fig7") == "catalysis");
    CHECK(preset_experiment("fig8") == "carnot");
    CHECK_THROWS_AS(preset_experiment("fig9"), ConfigError);
}
