#include "doctest.h"
#include "qkin/config.hpp"

using namespace qkin;
using nlohmann::json;

TEST_CASE("empty config yields the documented defaults") {
  const RunConfig c = parse_config(json::object());
  CHECK(c.modes == 3);
  CHECK(c.max_particles == 2);
  CHECK(c.statistics == Statistics::Bose);
  CHECK(c.potential.kind == Potential::Kind::Gaussian);
  CHECK_FALSE(c.delta.has_value());
  CHECK(c.echo == default_config());
  CHECK(c.initial.size() == 1);
}

TEST_CASE("unknown keys and wrong types are rejected") {
  CHECK_THROWS_AS(parse_config(json{{"modez", 3}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"potential", {{"width", 0.1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"modes", "three"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"modes", 2.5}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"generator", {{"delta", "wide"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"checks", {{"couplings", {1.0, "x"}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("range checks reject physically meaningless values") {
  CHECK_THROWS_AS(parse_config(json{{"modes", 0}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"statistics", "fermi"}, {"modes", 2}, {"max_particles", 3}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"generator", {{"epsilon", -1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"geometry", {{"dimension", 2}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"cells", 2}, {"initial", {{"cells", {{{"beta", 0.1}}}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"seed", -4}}), ConfigError);
}

TEST_CASE("per-cell initial fields and overrides") {
  json j = {{"cells", 2},
            {"initial", {{"cells", {{{"beta", 0.1}, {"mu", 0.0}}, {{"beta", 0.2}, {"v", {0.1, 0.0, 0.0}}}}}}}};
  apply_overrides(j, {"generator.delta=2.5", "statistics=fermi", "checks.couplings=[1,0.5]"});
  const RunConfig c = parse_config(j);
  CHECK(c.initial.cells[1].beta == 0.2);
  CHECK(c.initial.cells[1].v[0] == 0.1);
  REQUIRE(c.delta.has_value());
  CHECK(*c.delta == 2.5);
  CHECK(c.statistics == Statistics::Fermi);
  CHECK(c.couplings.size() == 2);
  CHECK_THROWS_AS(apply_overrides(j, {"novalue"}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
