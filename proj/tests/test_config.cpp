#include <doctest.h>

#include <cmath>

#include "clob/config.hpp"
#include "clob/errors.hpp"

using namespace clob;

TEST_CASE("empty document gives the defaults") {
    const RunConfig c = parse_run_config("{}");
    CHECK(c.seed == 1);
    CHECK(c.sim.lattice.D_alpha == 0.5);
    CHECK(c.sim.books.size() == 2);
    CHECK(c.calibration.setup.base.lattice.M == 400);
    CHECK(c.impact.Q.front() == 0.0);
}

TEST_CASE("presets and overrides") {
    const RunConfig c = parse_run_config(R"json({
        "preset": "table2",
        "seed": 42,
        "model": {"nu": 3.0},
        "books": [{"p(0)": 231.0}, {"lambda": 2.0}],
        "sampling": {"mode": "uniform"},
        "coupling": {"enabled": false},
        "calibration": {"iterations": 7, "theta0": {"alpha": 0.9}, "bounds": {"nu": [1, 50]}},
        "ingest": {"kept_trade_types": ["AT", "XT"], "auction_windows": [["12:00:00", "12:05:00"]]}
    })json");
    CHECK(c.seed == 42);
    CHECK(c.sim.lattice.alpha == 0.57);
    CHECK(c.sim.books[0].nu == 3.0);
    CHECK(c.sim.books[1].nu == 3.0);
    CHECK(c.sim.books[0].p0 == 231.0);
    CHECK(c.sim.books[1].lambda == 2.0);
    CHECK(c.sim.sampling == SamplingMode::Uniform);
    CHECK_FALSE(c.sim.coupling);
    CHECK(c.calibration.nmta.iterations == 7);
    CHECK(c.calibration.theta0[2] == 0.9);
    CHECK(c.calibration.bounds.upper[1] == 50.0);
    CHECK(c.calibration.setup.base.lattice.alpha == 0.57);
    CHECK(c.ingest.kept_trade_types.size() == 2);
    REQUIRE(c.ingest.auction_windows.size() == 1);
    CHECK(c.ingest.auction_windows[0].second - c.ingest.auction_windows[0].first == 300'000);
}

TEST_CASE("canonical dump round-trips") {
    const RunConfig a = parse_run_config(R"({"preset": "table2", "seed": 9, "epps": {"scales": [0.1, 1.0]}})");
    const std::string text = dump_run_config(a);
    const RunConfig b = parse_run_config(text);
    CHECK(dump_run_config(b) == text);
    CHECK(b.epps.scales == std::vector<double>{0.1, 1.0});
}

TEST_CASE("invalid documents are rejected") {
    CHECK_THROWS_AS(parse_run_config(R"({"modle": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"model": {"D": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"model": {"r": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"model": {"alpha": 0.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"model": {"Delta_x": 0.3}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"preset": "table9"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"seed": "x"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"calibration": {"theta0": {"nu": 500}}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"calibration": {"n_returns": 100}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
}

TEST_CASE("missing files name the path") {
    try {
        load_run_config("/nonexistent/run.json");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/run.json") != std::string::npos);
    }
}

TEST_CASE("default Epps scales") {
    const auto s = default_epps_scales(0.0625, 200.0, 16);
    REQUIRE(s.size() == 16);
    CHECK(s.front() == doctest::Approx(0.0625 / 4.0));
    CHECK(s.back() == doctest::Approx(10.0));
    for (std::size_t i = 2; i < s.size(); ++i)
        CHECK(std::log(s[i] / s[i - 1]) == doctest::Approx(std::log(s[1] / s[0])));
}
