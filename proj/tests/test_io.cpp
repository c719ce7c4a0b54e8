#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "sabr/io.hpp"

using namespace sabr;
using namespace sabr::io;

namespace {
std::string data_path(const char* name) {
    return std::string(SABR_DATA_DIR) + "/" + name;
}

std::string run_cli(const std::string& args, int expected_exit) {
    const std::string cmd = std::string(SABR_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == expected_exit);
    return out;
}
}  // namespace

TEST_CASE("equity fixture parses with the expected shape") {
    const auto file = parse_surface_file(data_path("eurostoxx50.csv"));
    CHECK(file.spot == 2311.1);
    CHECK(file.strike_mode == StrikeMode::Percent);
    REQUIRE(file.slices.size() == 4);
    CHECK(file.slices[0].maturity == 0.2438);
    CHECK(file.slices[0].rate_pct == 1.4198);
    CHECK(file.slices[0].dividend_pct == 1.5620);
    for (const auto& s : file.slices) CHECK(s.quotes.size() == 21);
    // Spot ATM vol of the 3-month slice, as printed (percent).
    CHECK(file.slices[0].quotes[10].first == 100.0);
    CHECK(file.slices[0].quotes[10].second == 29.79);

    const auto surface = file.to_surface();
    surface.validate();
    CHECK(surface.total_quotes() == 84);
    // Percent strikes resolve against the spot; vols and rates to decimals.
    CHECK(surface.slices[0].quotes[10].strike == doctest::Approx(2311.1));
    CHECK(surface.slices[0].quotes[10].vol == doctest::Approx(0.2979));
    CHECK(surface.slices[2].rate == doctest::Approx(0.010832));
}

TEST_CASE("fx fixture uses absolute strikes") {
    const auto file = parse_surface_file(data_path("eurusd.csv"));
    CHECK(file.spot == 1.2939);
    CHECK(file.strike_mode == StrikeMode::Absolute);
    REQUIRE(file.slices.size() == 4);
    for (const auto& s : file.slices) CHECK(s.quotes.size() == 19);
    const auto surface = file.to_surface();
    CHECK(surface.slices[0].quotes[9].strike == 1.2950);
    CHECK(surface.slices[0].quotes[9].vol == doctest::Approx(0.1470));
    CHECK(surface.slices[3].maturity == 2.0);
}

TEST_CASE("surface serialization round trip") {
    const auto file = parse_surface_file(data_path("eurusd.csv"));
    const auto text = serialize(file);
    const auto again = parse_surface_text(text);
    CHECK(again.spot == file.spot);
    CHECK(again.strike_mode == file.strike_mode);
    REQUIRE(again.slices.size() == file.slices.size());
    for (std::size_t i = 0; i < file.slices.size(); ++i) {
        CHECK(again.slices[i].maturity == file.slices[i].maturity);
        CHECK(again.slices[i].rate_pct == file.slices[i].rate_pct);
        CHECK(again.slices[i].dividend_pct == file.slices[i].dividend_pct);
        REQUIRE(again.slices[i].quotes.size() == file.slices[i].quotes.size());
        for (std::size_t j = 0; j < file.slices[i].quotes.size(); ++j) {
            CHECK(again.slices[i].quotes[j].first == file.slices[i].quotes[j].first);
            CHECK(again.slices[i].quotes[j].second == file.slices[i].quotes[j].second);
        }
    }
}

TEST_CASE("surface parse errors carry line numbers") {
    CHECK_THROWS_AS(parse_surface_text("nonsense,1\n"), parse_error);
    try {
        parse_surface_text("spot,100\nstrikes,percent\nslice,1.0,1.0,0.0\n90,bad\n");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 4);
    }
    // Quote before any slice header.
    CHECK_THROWS_AS(parse_surface_text("spot,100\nstrikes,percent\n90,20.0\n"),
                    parse_error);
    // Missing spot.
    CHECK_THROWS_AS(parse_surface_text("strikes,percent\nslice,1.0,1.0,0.0\n90,20\n"),
                    parse_error);
    CHECK_THROWS_AS(parse_surface_file("/nonexistent/file.csv"), parse_error);
}

TEST_CASE("comments and blank lines are ignored") {
    const auto file = parse_surface_text(
        "# header comment\nspot,100\n\nstrikes,absolute\n"
        "slice,0.5,2.0,1.0\n# mid comment\n90,21.5\n95,20.0\n");
    CHECK(file.spot == 100.0);
    REQUIRE(file.slices.size() == 1);
    CHECK(file.slices[0].quotes.size() == 2);
}

TEST_CASE("config parsing rejects unknown keys at every level") {
    const char* good = R"({
        "model": "static", "technique": "T_I", "surface": "s.csv", "slice": 1,
        "fixed": {"beta": 1.0},
        "bounds": {"nu": [0.01, 5.0]},
        "annealing": {"t0": 2.0, "cooling": 0.96, "chain_length": 50,
                      "workers": 8, "seed": 3}
    })";
    const auto cfg = parse_config_text(good);
    CHECK(cfg.model == "static");
    CHECK(cfg.slice == 1);
    CHECK(cfg.fixed.at("beta") == 1.0);
    CHECK(cfg.bounds.at("nu").first == 0.01);
    CHECK(cfg.schedule.t0 == 2.0);
    CHECK(cfg.schedule.seed == 3);

    CHECK_THROWS_AS(parse_config_text(R"({"model": "static", "typo": 1})"),
                    config_error);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"model": "static", "surface": "s", "annealing": {"warmth": 2}})"),
        config_error);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"model": "static", "surface": "s", "simulation": {"paths": 1}})"),
        config_error);
    // Malformed JSON (as opposed to valid JSON with bad content).
    CHECK_THROWS_AS(parse_config_text("{not json"), config_error);
}

TEST_CASE("config validation") {
    const char* base = R"({"model": "%s", "technique": "%s", "surface": "s.csv"})";
    char buf[256];
    std::snprintf(buf, sizeof(buf), base, "static", "T_I");
    CHECK_NOTHROW(parse_config_text(buf).validate());
    std::snprintf(buf, sizeof(buf), base, "pricer", "T_I");
    CHECK_THROWS_AS(parse_config_text(buf).validate(), config_error);
    // T_II is only defined for the general dynamic model.
    std::snprintf(buf, sizeof(buf), base, "static", "T_II");
    CHECK_THROWS_AS(parse_config_text(buf).validate(), config_error);
    std::snprintf(buf, sizeof(buf), base, "case2", "T_II");
    CHECK_NOTHROW(parse_config_text(buf).validate());
    // Inverted bounds.
    CHECK_THROWS_AS(parse_config_text(
                        R"({"model": "static", "technique": "T_I", "surface": "s",
                            "bounds": {"nu": [5.0, 0.01]}})")
                        .validate(),
                    config_error);
}

TEST_CASE("report serialization") {
    CalibrationReport rep;
    rep.model = "static";
    rep.technique = "T_I";
    rep.quantity = "vol";
    rep.params = {{"alpha", 0.3}, {"beta", 1.0}};
    rep.final_cost = 1.5e-3;
    rep.rows = {{0.25, 90.0, 0.21, 0.209, -0.0047619047619},
                {0.25, 100.0, 0.20, 0.201, 0.005}};
    rep.mean_rel_error = 4.88e-3;
    rep.max_rel_error = 5.0e-3;
    rep.wall_seconds = 1.25;
    rep.evals = 1234;
    rep.seed = 7;

    const auto csv = report_to_csv(rep);
    CHECK(csv.find("maturity") != std::string::npos);
    CHECK(csv.find("90") != std::string::npos);

    const auto json = report_to_json(rep);
    CHECK(json.find("\"schema_version\"") != std::string::npos);
    CHECK(json.find("\"alpha\"") != std::string::npos);
    CHECK(json.find("\"rows\"") != std::string::npos);
}

TEST_CASE("cli: missing file and malformed input map to distinct exit codes") {
    run_cli("calibrate --config /nonexistent.json", kExitConfig);

    const auto tmp = std::string("/tmp/sabr_bad_surface.csv");
    {
        std::ofstream out(tmp);
        out << "spot,100\nstrikes,percent\nslice,1.0,1.0,0.0\n90,notanumber\n";
    }
    const auto cfg = std::string("/tmp/sabr_bad_cfg.json");
    {
        std::ofstream out(cfg);
        out << R"({"model": "static", "technique": "T_I", "surface": ")" << tmp
            << R"(", "fixed": {"alpha": 0.3, "beta": 1.0, "nu": 0.5, "rho": -0.5}})";
    }
    const auto msg = run_cli("calibrate --config " + cfg, kExitParse);
    CHECK(msg.find("line 4") != std::string::npos);

    run_cli("calibrate", kExitConfig);  // --config is required
}

TEST_CASE("cli: smile evaluation on fixed parameters") {
    const auto params = std::string("/tmp/sabr_smile_params.json");
    {
        std::ofstream out(params);
        out << R"({"model": "static",
                   "params": {"alpha": 0.146859, "beta": 1.0, "nu": 0.911966,
                              "rho": -0.447718}})";
    }
    const auto out = run_cli(
        "smile --params " + params + " --surface " + data_path("eurusd.csv"),
        kExitOk);
    CHECK(out.find("maturity,strike,vol") != std::string::npos);
    // One line per quote plus the header.
    std::size_t lines = 0;
    for (char c : out)
        if (c == '\n') ++lines;
    CHECK(lines >= 20);
}
