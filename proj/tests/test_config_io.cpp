#include <catch2/catch.hpp>

#include "tdskit/config.hpp"
#include "tdskit/io_util.hpp"

using namespace tdskit;

TEST_CASE("sectioned key=value config", "[config]") {
    const auto cfg = Config::parse(
        "# parameters\n"
        "[grain]\n"
        "E_d_eV = 1.07\n"
        "alpha_t0_per_s = 4.2e8   # trapping prefactor\n"
        "label = sample_E\n"
        "\n"
        "[numerics]\n"
        "cells = 200\n");

    CHECK(cfg.get_double("grain", "E_d_eV") == Approx(1.07));
    CHECK(cfg.get_double("grain", "alpha_t0_per_s") == Approx(4.2e8));
    CHECK(cfg.get_string("grain", "label") == "sample_E");
    CHECK(cfg.get_long("numerics", "cells") == 200);
    CHECK(cfg.get_double_or("numerics", "dt_max_s", 5.0) == 5.0);
    CHECK(cfg.has("grain", "E_d_eV"));
    CHECK_FALSE(cfg.has("grain", "nope"));

    CHECK_THROWS_AS(cfg.get_double("grain", "nope"), ConfigError);
    CHECK_THROWS_AS(cfg.get_double("grain", "label"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[oops\nk = v\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[s]\nno_equals_here\n"), ConfigError);
}

TEST_CASE("override precedence", "[config]") {
    auto cfg = Config::parse("[slab]\nl_ox_nm = 1\n");
    cfg.set("slab", "l_ox_nm", "15");
    CHECK(cfg.get_double("slab", "l_ox_nm") == 15.0);
}

TEST_CASE("locale-independent number formatting", "[config]") {
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(1e30).find('.') == std::string::npos); // exponent form
    CHECK(io::parse_double("6.9e-7") == Approx(6.9e-7));
    CHECK(io::parse_double(io::format_double(3.141592653589793)) == 3.141592653589793);
    CHECK_THROWS(io::parse_double("1,5"));
    CHECK_THROWS(io::parse_double(""));

    const auto fields = io::split_csv(" 1.0, 2.5 ,x ");
    REQUIRE(fields.size() == 3);
    CHECK(fields[0] == "1.0");
    CHECK(fields[1] == "2.5");
    CHECK(fields[2] == "x");
}
