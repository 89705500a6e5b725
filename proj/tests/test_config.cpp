#include <catch2/catch_amalgamated.hpp>

#include "adiab/config.hpp"

using namespace adiab;

TEST_CASE("minimal config takes documented defaults") {
    const ExperimentConfig cfg = parse_config("model.omega = 1\nmodel.eta0 = 2\n");
    CHECK(cfg.omega == 1.0);
    CHECK(cfg.eta0 == 2.0);
    CHECK(cfg.g_spec == "cos");
    CHECK(cfg.I0 == 1.0);
    CHECK(cfg.phi0 == 1.5707963267948966);
    CHECK(cfg.method == "rk8_adaptive");
    CHECK(cfg.abs_tol == 1e-12);
    CHECK(cfg.xi_reach == 60.0);
    CHECK(cfg.eps_min == 0.08);
    CHECK(cfg.eps_max == 0.2);
    CHECK(cfg.eps_count == 8);
    CHECK(cfg.spacing == "log");
    CHECK(cfg.threads == 0);
    CHECK(cfg.out_dir == ".");
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
    const ExperimentConfig cfg = parse_config(
        "# experiment setup\n"
        "\n"
        "  model.omega =  2.5   # fast frequency\n"
        "sweep.eps_list = 0.1, 0.12, 0.15\n");
    CHECK(cfg.omega == 2.5);
    CHECK(cfg.eps_list == std::vector<double>{0.1, 0.12, 0.15});
    CHECK(cfg.eps_grid() == std::vector<double>{0.1, 0.12, 0.15});
}

TEST_CASE("errors carry line numbers") {
    SECTION("duplicate key names both lines") {
        try {
            parse_config("model.omega = 1\nmodel.eta0 = 2\nmodel.omega = 3\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("line 3") != std::string::npos);
            CHECK(msg.find("line 1") != std::string::npos);
            CHECK(msg.find("model.omega") != std::string::npos);
        }
    }
    SECTION("unknown key") {
        try {
            parse_config("model.omegaa = 1\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("line 1") != std::string::npos);
            CHECK(msg.find("unknown key") != std::string::npos);
        }
    }
    SECTION("type mismatch") {
        try {
            parse_config("\nmodel.omega = fast\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("line 2") != std::string::npos);
            CHECK(msg.find("number") != std::string::npos);
        }
    }
    SECTION("missing equals sign") {
        CHECK_THROWS_AS(parse_config("model.omega 1\n"), ConfigError);
    }
}

TEST_CASE("validation rejects bad values") {
    CHECK_THROWS_AS(parse_config("integration.xi_reach = 10\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("sweep.eps_min = -0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("integration.method = euler\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("sweep.spacing = cubic\n"), ConfigError);
}

TEST_CASE("serialization round-trips") {
    const ExperimentConfig cfg = parse_config(
        "model.omega = 1.75\n"
        "model.eta0 = 2.25\n"
        "model.g = fourier 1:0.5:0, 3:0:0.25\n"
        "initial.phi0 = 0.125\n"
        "integration.method = rk4_fixed\n"
        "integration.step = 0.005\n"
        "sweep.eps_list = 0.1, 0.15\n"
        "phase.count = 12\n"
        "run.threads = 2\n"
        "output.directory = /tmp/run1\n"
        "report.gamma_rel_tol = 0.04\n");
    const ExperimentConfig back = parse_config(serialize_config(cfg));
    CHECK(serialize_config(back) == serialize_config(cfg));
    CHECK(back.omega == cfg.omega);
    CHECK(back.g_spec == cfg.g_spec);
    CHECK(back.eps_list == cfg.eps_list);
    CHECK(back.method == cfg.method);
    CHECK(back.step == cfg.step);
    CHECK(back.phase_count == cfg.phase_count);
    CHECK(back.out_dir == cfg.out_dir);
    CHECK(back.gamma_rel_tol == cfg.gamma_rel_tol);
}

TEST_CASE("epsilon grids") {
    ExperimentConfig cfg;
    cfg.eps_min = 0.08;
    cfg.eps_max = 0.2;
    cfg.eps_count = 8;
    cfg.spacing = "log";
    const auto grid = cfg.eps_grid();
    REQUIRE(grid.size() == 8);
    CHECK_THAT(grid.front(), Catch::Matchers::WithinRel(0.08, 1e-14));
    CHECK_THAT(grid.back(), Catch::Matchers::WithinRel(0.2, 1e-14));
    // log spacing: constant ratio
    for (std::size_t i = 2; i < grid.size(); ++i)
        CHECK_THAT(grid[i] / grid[i - 1],
                   Catch::Matchers::WithinRel(grid[1] / grid[0], 1e-12));
    cfg.spacing = "linear";
    const auto lin = cfg.eps_grid();
    for (std::size_t i = 2; i < lin.size(); ++i)
        CHECK_THAT(lin[i] - lin[i - 1],
                   Catch::Matchers::WithinAbs(lin[1] - lin[0], 1e-14));
}

TEST_CASE("coupling specs") {
    ExperimentConfig cfg;
    CHECK(cfg.coupling().kind() == GCoupling::Kind::cosine);
    cfg.g_spec = "fourier 1:1:0, 2:0:0.5";
    CHECK(cfg.coupling().kind() == GCoupling::Kind::fourier);
    cfg.g_spec = "fourier 1:bad";
    CHECK_THROWS_AS(cfg.coupling(), ConfigError);
    cfg.g_spec = "sawtooth";
    CHECK_THROWS_AS(cfg.coupling(), ConfigError);
}
