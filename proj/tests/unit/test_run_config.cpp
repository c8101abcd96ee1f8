#include "mlescape/error.hpp"
#include "mlescape/run_config.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace mlescape;

TEST_SUITE("run_config") {

TEST_CASE("empty configuration gives the defaults")
{
    const RunConfig c = parse_config_text("");
    CHECK(c == RunConfig{});
    CHECK(c.noise.alpha == 1.25);
    CHECK(c.noise.sigma1 == 0.5);
    CHECK(c.noise.sigma2 == 0.5);
    CHECK(c.solver.grid.n_v == 201);
    CHECK(c.mc.paths == 100000);
    CHECK_NOTHROW(c.validate());
    const State s = c.evaluation_point();
    CHECK(s.v == doctest::Approx(-2.7276617).epsilon(1e-6));
    CHECK(s.w == doctest::Approx(1.2436).epsilon(1e-4));
}

TEST_CASE("values, comments and aliases")
{
    const RunConfig c = parse_config_text("# comment\n"
                                          "noise.alpha = 0.75\n"
                                          "noise.sigma = 0.3   # both channels\n"
                                          "solver.n = 51\n"
                                          "point = 0.5, 1.5\n"
                                          "sweep.sigmas = 0.1, 0.2\n"
                                          "mc.antithetic = true\n");
    CHECK(c.noise.alpha == 0.75);
    CHECK(c.noise.sigma1 == 0.3);
    CHECK(c.noise.sigma2 == 0.3);
    CHECK(c.solver.grid == Grid{51, 51});
    REQUIRE(c.point);
    CHECK(c.point->v == 0.5);
    CHECK(c.point->w == 1.5);
    CHECK(c.sweep.sigmas == std::vector<double>{0.1, 0.2});
    CHECK(c.mc.antithetic);
}

TEST_CASE("errors name the key")
{
    CHECK_THROWS_WITH_AS(parse_config_text("noise.alpha = 2.5"), doctest::Contains("noise.alpha"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("noise.alpha = 2.5"), doctest::Contains("(0,2]"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("noise.colour = red"), doctest::Contains("noise.colour"), Error);
    CHECK_THROWS_AS(parse_config_text("solver.n_v = many"), Error);
    CHECK_THROWS_AS(parse_config_text("mc.paths = 0"), Error);
    CHECK_THROWS_AS(parse_config_text("just text"), Error);
    try {
        parse_config_text("region.a = 3");
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
    CHECK_THROWS_AS(parse_config(std::filesystem::path("/nonexistent/run.cfg")), Error);
}

TEST_CASE("overrides apply after the text")
{
    const RunConfig c = parse_config_text("noise.alpha = 0.5", {"noise.alpha=1.5", "solver.n_w = 31"});
    CHECK(c.noise.alpha == 1.5);
    CHECK(c.solver.grid.n_w == 31);
    CHECK_THROWS_AS(parse_config_text("", {"noise.alpha"}), Error);
}

TEST_CASE("emit and parse round trip")
{
    RunConfig c;
    c.noise = {0.3, 0.123456789012345, 1.0 / 3.0, JumpNormalization::planar};
    c.model.current = 85.5;
    c.region.d = 6.1;
    c.target.b_p = 3.0;
    c.point = State{-1.0 / 7.0, 2.0};
    c.solver.quadrature = Quadrature::taylor;
    c.sweep.mode = SweepMode::fix_sigma2;
    c.sweep.alphas = {0.1, 0.2};
    c.mc.seed = 42;
    c.output_dir = "runs/x";
    const RunConfig back = parse_config_text(emit_config(c));
    CHECK(back == c);
    CHECK(parse_config_text(emit_config(RunConfig{})) == RunConfig{});

    const auto keys = config_keys();
    CHECK(std::find(keys.begin(), keys.end(), "noise.alpha") != keys.end());
    CHECK(std::find(keys.begin(), keys.end(), "model.current") != keys.end());
}

TEST_CASE("derived problem")
{
    RunConfig c = parse_config_text("model.drift = zero\nsolver.n = 21");
    const State centre = c.evaluation_point();
    CHECK(centre.v == doctest::Approx(c.region.center().v));
    const SweepProblem p = c.sweep_problem();
    CHECK(p.solver.grid.n_v == 21);
    CHECK(p.drift({1.0, 1.0}) == State{0.0, 0.0});
    CHECK(c.drift_key() != parse_config_text("").drift_key());
}

}
