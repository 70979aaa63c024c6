#include <htbem/config.hpp>
#include <htbem/csv.hpp>

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace htbem;

TEST_CASE("real formatting survives a parse round trip") {
    for (double v : {1.0 / 3.0, 0.1, -2.718281828459045, 1e300, 5e-324, 0.0,
                     6.75854392071443}) {
        std::string s = format_real(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("csv writer emits byte-stable rows") {
    const char* path = "csv_writer_check.csv";
    {
        CsvWriter w(path, {"name", "value", "err"});
        w.write_row({"flux"}, {1.0, 2.5e-7});
        w.write_row({"mass"}, {0.5, 1.0 / 3.0});
    }
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == "name,value,err\n"
                       "flux,1,2.4999999999999999e-07\n"
                       "mass,0.5,0.33333333333333331\n");
    std::remove(path);
}

TEST_CASE("csv writer rejects ragged rows") {
    const char* path = "csv_ragged.csv";
    CsvWriter w(path, {"a", "b"});
    CHECK_THROWS_AS(w.write_row({1.0, 2.0, 3.0}), std::runtime_error);
    std::remove(path);
}

TEST_CASE("config text parsing") {
    ConfigMap cfg = parse_config_text("# leading comment\n"
                                      "[mesh]\n"
                                      "radius = 1.5\n"
                                      "h = 0.05   ; grid step\n"
                                      "center = 0.1 -0.2\n"
                                      "[run]\n"
                                      "seed = 42\n");
    CHECK(cfg.has("mesh.radius"));
    CHECK(cfg.get_double("mesh.radius", 0.0) == 1.5);
    CHECK(cfg.get_int("run.seed", 0) == 42);
    CHECK(cfg.get("missing.key", "fallback") == "fallback");
    auto center = cfg.get_list("mesh.center");
    REQUIRE(center.size() == 2);
    CHECK(center[1] == -0.2);

    CHECK_THROWS_AS((void)cfg.get_double("mesh.center", 0.0), std::invalid_argument);
    // Keys before any section header are stored unqualified.
    CHECK(parse_config_text("bare = 1\n").get("bare") == "1");
    CHECK_THROWS_AS((void)parse_config_text("[mesh\nradius = 1\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config_text("just some words\n"),
                    std::invalid_argument);
}

TEST_CASE("config hash is order independent and value sensitive") {
    ConfigMap a = parse_config_text("[s]\nx = 1\ny = 2\n");
    ConfigMap b = parse_config_text("[s]\ny = 2\nx = 1\n");
    ConfigMap c = parse_config_text("[s]\nx = 1\ny = 3\n");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("experiment config defaults and guards") {
    ExperimentConfig ec = load_experiment_config(parse_config_text("[mesh]\nh = 0.1\n"));
    CHECK(ec.group == "heisenberg1");
    CHECK(ec.mesh_h == 0.1);
    CHECK(ec.probes.empty());

    ConfigMap probes = parse_config_text("[probes]\np0 = 0.2 0.0 0.0\np1 = 0.3 0.1 0.04\n");
    CHECK(load_experiment_config(probes).probes.size() == 2);

    CHECK_THROWS_AS((void)load_experiment_config(
                        parse_config_text("[solver]\ntol = 0.5\n")),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)load_experiment_config(
                        parse_config_text("[mesh]\nradius = 0.4\nh = 0.2\n")),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)load_experiment_config(
                        parse_config_text("[solver]\nmode = banana\n")),
                    std::invalid_argument);
}

TEST_CASE("group resolution by name") {
    GroupSpec h1 = resolve_group("heisenberg1");
    CHECK(h1.m == 2);
    CHECK(h1.has_c_q());
    CHECK(h1.c_q == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-9));

    GroupSpec h2 = resolve_group("heisenberg2");
    CHECK(h2.m == 4);
    CHECK(h2.n == 1);
    CHECK(h2.has_c_q());

    CHECK_THROWS_AS((void)resolve_group("euclidean3"), std::invalid_argument);
}
