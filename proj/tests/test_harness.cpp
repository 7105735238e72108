#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "plab/harness.hpp"

using namespace plab;

TEST_CASE("slope fit") {
    std::vector<double> t, a, c, w;
    for (int k = 0; k < 40; ++k) {
        double x = 10.0 * std::pow(100.0, k / 39.0);
        t.push_back(x);
        a.push_back(3.0 * std::pow(x, -0.5));
        c.push_back(2.0);
        w.push_back(std::pow(x, -0.5) * (1 + 0.1 * std::sin(std::log(x))));
    }
    CHECK(fit_decay_slope(t, a, 10, 1000).slope == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(std::abs(fit_decay_slope(t, c, 10, 1000).slope) < 1e-12);
    CHECK(std::abs(fit_decay_slope(t, w, 10, 1000).slope + 0.5) <= 0.05);
    CHECK_THROWS(fit_decay_slope(t, a, 10, 12));
    a[3] = -1.0;
    CHECK_THROWS(fit_decay_slope(t, a, 10, 1000));
}

TEST_CASE("config validation") {
    auto ok = parse_config_text(R"({"experiment": "heat", "seed": 3, "grid": {"n": 16}, "knobs": {"s": 0.5}})");
    CHECK(ok.seed == 3);
    CHECK(ok.n == 16);
    CHECK(ok.knob("s", 0.0) == 0.5);
    try {
        parse_config_text(R"({"experiment": "heat", "seed": 1, "grid": {"nn": 16}})");
        FAIL("accepted an unknown key");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("nn") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text(R"({"experiment": "heat"})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment": "nope", "seed": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment": "heat", "seed": 1, "knobs": {"eps_list": [1]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"experiment": "heat", "seed": 1, "params": {"mu": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
    for (const auto& e : known_experiments()) CHECK_NOTHROW(default_config(e, 1));
}

TEST_CASE("smoke run passes quickly and is reproducible") {
    auto cfg = parse_config_text(R"({"experiment": "smoke", "seed": 5})");
    RunReport r = run_experiment(cfg);
    CHECK(r.all_pass());
    CHECK(r.wall_clock < 1.0);
    for (const auto& c : r.criteria) CHECK(!c.anchor.empty());
    for (const auto& c : r.constants) CHECK(!c.seeds.empty());

    auto dir = std::filesystem::temp_directory_path() / "plab_harness_test";
    std::filesystem::remove_all(dir);
    auto cfg2 = parse_config_text(R"({"experiment": "lp-check", "seed": 2, "knobs": {"fields": 3}})");
    RunReport a = run_experiment(cfg2), b = run_experiment(cfg2);
    REQUIRE(!a.tables.empty());
    CHECK(table_csv(a.tables.back()) == table_csv(b.tables.back()));
    write_report(dir.string(), a, true);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "partition.csv"));
    CHECK(std::filesystem::exists(dir / "partition.svg"));
    std::ifstream f(dir / "report.json");
    auto j = nlohmann::json::parse(f);
    CHECK(j.at("config").at("seed") == 2);
    CHECK(j.at("criteria").size() == 2);
}

TEST_CASE("csv layout") {
    Table t{"x", {"t", "v"}, {{1.0, 0.5}, {2.0, 0.25}}};
    CHECK(table_csv(t) == "t,v\n1,0.5\n2,0.25\n");
}

TEST_CASE("transition detector sees an exponential tail") {
    std::vector<double> t, v;
    for (int k = 1; k <= 400; ++k) {
        t.push_back(k);
        v.push_back(k < 100 ? std::pow(k, -0.5) : std::pow(100.0, -0.5) * std::exp(-0.05 * (k - 100)));
    }
    TransitionReport tr = detect_transition(t, v, -0.5, 10.0, 16.0, 1.0);
    CHECK(tr.detected);
    CHECK(tr.t_transition >= 99.0);
    CHECK(tr.predicted_gap_rate == doctest::Approx(0.5 / 256));
}
