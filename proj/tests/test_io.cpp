#include <doctest.h>

#include "rrlmi/io.hpp"

using namespace rrlmi;

TEST_SUITE("io") {

TEST_CASE("config defaults and round trip") {
    const auto c = config_from_json(json::object());
    CHECK(c.command == "synthesize");
    CHECK(c.system.builtin == "example2");
    CHECK(c.system.N == 10);
    CHECK(c.delta == 0.0005);
    CHECK(c.structure == MultiplierStructure::SharedU);
    CHECK(c.minimize);

    json j = config_to_json(c);
    CHECK(config_to_json(config_from_json(j)) == j);

    json k = {{"command", "simulate"},
              {"system", {{"builtin", "example4"}, {"N", 20}}},
              {"params", {{"gamma", 3.5}, {"structure", "zero-top"}}},
              {"simulation", {{"disturbance", "pulse"}, {"horizon", 12.0}}},
              {"seed", 42}};
    const auto c2 = config_from_json(k);
    CHECK(c2.system.builtin == "example4");
    CHECK(c2.system.N == 20);
    CHECK_FALSE(c2.minimize);
    CHECK(c2.gamma == 3.5);
    CHECK(c2.structure == MultiplierStructure::ZeroTop);
    CHECK(c2.horizon == 12.0);
    CHECK(c2.seed == 42);
    CHECK(config_to_json(config_from_json(config_to_json(c2))) == config_to_json(c2));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(config_from_json({{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"params", {{"alpah", 0.4}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"params", {{"structure", "diagonal"}}}}), ConfigError);

    auto c = config_from_json({{"params", {{"h", 0.5}}}});
    const auto sys = c.build_system();
    CHECK_THROWS_AS(c.build_params(sys), ConfigError);
}

TEST_CASE("system and gains round trip") {
    const auto sys = example4_system(6);
    const auto back = system_from_json(system_to_json(sys));
    REQUIRE(back.N() == 6);
    CHECK(back.delta == sys.delta);
    for (int i = 1; i <= 6; ++i) {
        CHECK((back.sub(i).A - sys.sub(i).A).norm() == 0.0);
        CHECK(back.sub(i).neighbors() == sys.sub(i).neighbors());
    }
    json broken = system_to_json(sys);
    broken["subsystems"][0]["B"] = json::array({json::array({0.0}), json::array({0.0})});
    CHECK_THROWS_AS(system_from_json(broken), ConfigError);

    ControllerGains g;
    g.i = 1;
    g.Kii = (Mat(1, 2) << 0.5, -0.25).finished();
    g.Kij = {{2, (Mat(1, 2) << 1, 2).finished()}};
    g.cond_U = 1;
    const auto gb = gains_from_json(gains_to_json({g}));
    REQUIRE(gb.size() == 1);
    CHECK((gb[0].Kii - g.Kii).norm() == 0.0);
    CHECK(gb[0].Kij[0].j == 2);
    CHECK((gb[0].Kij[0].Aij - g.Kij[0].Aij).norm() == 0.0);
}

}
