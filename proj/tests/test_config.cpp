#include <catch2/catch_amalgamated.hpp>

#include "dspstab/config.hpp"

using namespace dspstab;
using Catch::Approx;

TEST_CASE("minimal config gets defaults") {
    const RunConfig cfg = parse_config("scheme = \"mlf\"\nu_minus = 1\nu_plus = -1\n");
    CHECK(cfg.nu == 0.5);
    CHECK(cfg.D == 0.8);
    CHECK(cfg.half_width == 60);
    CHECK(cfg.n_max == 2000);
    CHECK(cfg.out_dir == "out");
}

TEST_CASE("reference config parses to the table-reproduction run") {
    const std::string text =
        "[scheme]\nscheme = mlf\nnu = 0.5\nD = 0.8\nflux = burgers\n"
        "state_lo = -1.5\nstate_hi = 1.5\n"
        "[shock]\nu_minus = 1\nu_plus = -1\n"
        "[experiment]\nchoice = 1\np = 1\nj_max = 50\nn_max = 2000\n";
    const RunConfig cfg = parse_config(text);
    CHECK(cfg.nu == Approx(0.5));
    CHECK(cfg.D == Approx(0.4 / 0.5));
    CHECK(cfg.u_minus == 1.0);
    CHECK(cfg.u_plus == -1.0);
    CHECK(cfg.choice == 1);
    CHECK(cfg.p == 1.0);
    CHECK(cfg.j_max == 50);
}

TEST_CASE("range errors carry line numbers") {
    try {
        parse_config("nu = 0.5\nnu = -1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("out of range") != std::string::npos);
    }
}

TEST_CASE("unknown keys and sections are rejected") {
    CHECK_THROWS_AS(parse_config("mystery = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[mystery]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("nu 0.5\n"), ConfigError);
}

TEST_CASE("comments and quoting") {
    const RunConfig cfg = parse_config("# leading comment\nnu = 0.25 ; trailing\nout_dir = \"results\"\n");
    CHECK(cfg.nu == 0.25);
    CHECK(cfg.out_dir == "results");
}

TEST_CASE("config echo round trip") {
    RunConfig cfg;
    cfg.nu = 0.125;
    cfg.j_max = 77;
    const RunConfig back = parse_config(render_config(cfg));
    CHECK(back.nu == cfg.nu);
    CHECK(back.j_max == cfg.j_max);
    CHECK(back.out_dir == cfg.out_dir);
}
