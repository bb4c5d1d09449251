#include <doctest.h>

#include <algorithm>

#include "socsim/config.hpp"
#include "support.hpp"

using namespace socsim;

namespace {

const char* kBase = R"(simulation:
  name: cfg
  seed: 3
  engine: simultaneous
  execution:
    max_steps: 2
environment:
  component: twitter_like
scenario: ai_conference
models:
  scripted: {oracle: scripted, fixture: ../fixtures/random_actor.yaml}
agents:
  defaults: {model: scripted}
  roster: {count: 12, id_prefix: bot_}
)";

std::string with_line(const std::string& after, const std::string& line) {
  std::string y = kBase;
  const auto at = y.find(after);
  REQUIRE(at != std::string::npos);
  y.insert(at + after.size(), line);
  return y;
}

int error_line(const std::string& yaml) {
  try {
    parse_config(yaml, (tsupport::data_dir() / "configs").string());
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("schema errors carry the offending position") {
  CHECK(error_line(with_line("  name: cfg\n", "  bogus: 1\n")) == 3);
  CHECK(error_line(with_line("    max_steps: 2\n", "    budget: {policy: sometimes}\n")) == 7);
  CHECK(error_line("simulation: [1, 2\n") > 0);
  CHECK(error_line("- just\n- a list\n") == 1);
}

TEST_CASE("count rosters pad ids to a common width") {
  const auto rc = resolve(tsupport::config_from_yaml(kBase));
  REQUIRE(rc.config.agents.size() == 12);
  CHECK(rc.config.agents.front().id == "bot_00");
  CHECK(rc.config.agents.back().id == "bot_11");
  for (const auto& a : rc.config.agents) CHECK(a.model == "scripted");
}

TEST_CASE("resolution is deterministic and a fixed point") {
  const auto cfg = tsupport::config_from_yaml(kBase);
  const auto a = resolve(cfg);
  const auto b = resolve(cfg);
  CHECK(a.digest == b.digest);
  CHECK(a.digest.size() == 64);
  const auto again = resolved_from_tree(a.tree);
  CHECK(again.digest == a.digest);
  CHECK(again.config.engine == a.config.engine);
}

TEST_CASE("overrides") {
  const auto cfg = tsupport::config_from_yaml(kBase);
  const auto plain = resolve(cfg);

  const auto seeded = resolve(cfg, {{"seed", 99}});
  CHECK(seeded.seed == 99);
  CHECK(seeded.digest != plain.digest);

  const auto longer = resolve(cfg, {{"simulation.execution.max_steps", 5}});
  CHECK(longer.config.engine.max_steps == 5);

  CHECK_THROWS_AS(resolve(cfg, {{"simulation.execution.nonsense", 1}}), ConfigError);
  CHECK_THROWS_AS(resolve(cfg, {{"simulation.execution.max_steps", "many"}}), ConfigError);

  const auto fixture = (tsupport::data_dir() / "fixtures" / "style_small.yaml").string();
  const auto refixtured = resolve(cfg, {{"models.scripted.fixture", fixture}});
  CHECK(refixtured.config.models.at("scripted").fixture.is_object());
  CHECK(refixtured.digest != plain.digest);
  CHECK_THROWS_AS(resolve(cfg, {{"models.nobody.fixture", fixture}}), ConfigError);

  const auto swapped = resolve(cfg, {{"scenario", "misinformation"}});
  CHECK(swapped.scenario.name == "misinformation");
  CHECK(swapped.config.agents.size() == 12);
}

TEST_CASE("a scenario override reaches scenario-derived rosters") {
  const auto base = resolve(tsupport::data_config("style"));
  const auto rc = resolve(tsupport::data_config("style"), {{"scenario", "misinformation"}});
  CHECK(rc.scenario.name == "misinformation");
  std::vector<std::string> ids;
  for (const auto& a : rc.config.agents) ids.push_back(a.id);
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<std::string>{"ben", "felix", "greg", "hana", "nina", "sofia"});
  CHECK(base.config.agents.size() != rc.config.agents.size());
}

TEST_CASE("model override rewrites every roster entry") {
  const auto rc = resolve(tsupport::data_config("style"), {{"model", "gpt4o"}});
  for (const auto& a : rc.config.agents) CHECK(a.model == "gpt4o");
  CHECK_THROWS_AS(resolve(tsupport::data_config("style"), {{"model", "missing_model"}}), ConfigError);
}

TEST_CASE("bundled configs resolve") {
  for (const char* name : {"echo", "engagement", "style"}) {
    CAPTURE(name);
    const auto rc = resolve(tsupport::data_config(name));
    CHECK_FALSE(rc.config.agents.empty());
    CHECK(rc.canonical() == canonical_bytes(rc.tree));
  }
}

TEST_CASE("override assignments") {
  auto [k, v] = parse_override("simulation.execution.max_steps=4");
  CHECK(k == "simulation.execution.max_steps");
  CHECK(v == Json(4));
  CHECK(parse_override("a=true").second == Json(true));
  CHECK(parse_override("a=0.5").second == Json(0.5));
  CHECK(parse_override("a='7'").second == Json("7"));
  CHECK(parse_override("a = word").second == Json("word"));
  CHECK_THROWS_AS(parse_override("=3"), ConfigError);
  CHECK_THROWS_AS(parse_override("novalue"), ConfigError);
  CHECK_THROWS_AS(parse_override("a..b=1"), ConfigError);
}
