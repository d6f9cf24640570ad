#include <doctest.h>

#include <random>

#include "aoi/errors.hpp"
#include "aoi/safety.hpp"
#include "helpers.hpp"

using namespace aoi;

TEST_CASE("tokenize splits on semicolons and newlines") {
  auto cmds = tokenize_script("SELECT 1; SHOW tables");
  REQUIRE(cmds.size() == 2);
  CHECK(cmds[0].verb == "SELECT");
  CHECK(cmds[1].verb == "SHOW");

  cmds = tokenize_script("GET /health\nLIST pods");
  REQUIRE(cmds.size() == 2);
  CHECK(cmds[0].arguments == std::vector<std::string>{"/health"});
}

TEST_CASE("semicolons inside quotes do not split") {
  const auto cmds = tokenize_script("INSERT INTO t VALUES (';')");
  REQUIRE(cmds.size() == 1);
  CHECK(cmds[0].verb == "INSERT");
  CHECK(cmds[0].classification == Classification::Mutating);
  const auto dq = tokenize_script("READ \"a;b\"; LIST x");
  CHECK(dq.size() == 2);
}

TEST_CASE("tokenize trims, drops empty statements, keeps raw case") {
  const auto cmds = tokenize_script("  select * from t ;;\n\n  ; show x  ");
  REQUIRE(cmds.size() == 2);
  CHECK(cmds[0].raw_text == "select * from t");
  CHECK(cmds[0].verb == "SELECT");
  CHECK(cmds[0].classification == Classification::ReadOnly);
  CHECK(tokenize_script("").empty());
  CHECK(tokenize_script(" ;\n ; ").empty());
}

TEST_CASE("unterminated quote reports line and column") {
  try {
    tokenize_script("SELECT 1;\nREAD 'abc");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 6);
  }
}

TEST_CASE("classification against the fixed verb sets") {
  for (const char* v : {"SELECT", "SHOW", "DESCRIBE", "GET", "LIST", "READ"})
    CHECK(parse_command(std::string(v) + " x").classification == Classification::ReadOnly);
  for (const char* v : {"DELETE", "UPDATE", "INSERT", "DROP", "ALTER", "TRUNCATE"})
    CHECK(parse_command(std::string(v) + " x").classification == Classification::Mutating);
  CHECK(parse_command("RESTART web").classification == Classification::Unknown);
  CHECK(parse_command("drop table x").classification == Classification::Mutating);
  CHECK(parse_command("Select 1").classification == Classification::ReadOnly);
  // Verb matching is exact, not prefix based.
  CHECK(parse_command("SELECTED x").classification == Classification::Unknown);
}

TEST_CASE("probe policy examples") {
  const auto ok = tokenize_script("SELECT 1; SHOW x");
  CHECK(validate_script(ok, PolicyKind::Probe).safe);
  const auto bad = tokenize_script("SELECT 1; DELETE FROM t");
  const auto v = validate_script(bad, PolicyKind::Probe);
  CHECK_FALSE(v.safe);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].index == 1);
  CHECK(v.violations[0].verb == "DELETE");
  CHECK_FALSE(validate_script(tokenize_script("RESTART x"), PolicyKind::Probe).safe);
}

TEST_CASE("executor policy examples") {
  CHECK(validate_script(tokenize_script("UPDATE config SET a=1"), PolicyKind::Executor).safe);
  CHECK(validate_script(tokenize_script("RESTART web"), PolicyKind::Executor).safe);
  const auto v = validate_script(tokenize_script("DROP TABLE x; TRUNCATE y; UPDATE z"), PolicyKind::Executor);
  CHECK_FALSE(v.safe);
  CHECK(v.violations.size() == 2);
}

TEST_CASE("every violation is reported") {
  const std::vector<std::string> bad_verbs{"DELETE", "UPDATE", "INSERT", "DROP", "ALTER", "TRUNCATE", "RESTART", "KILL"};
  std::mt19937_64 rng(5);
  for (int k = 0; k <= 8; ++k) {
    std::string script;
    for (int i = 0; i < 10; ++i) script += "SELECT " + std::to_string(i) + ";";
    std::vector<Command> cmds = tokenize_script(script);
    for (int j = 0; j < k; ++j) cmds.insert(cmds.begin() + static_cast<long>(rng() % (cmds.size() + 1)),
                                            parse_command(bad_verbs[static_cast<std::size_t>(j)] + " t"));
    const auto verdict = validate_script(cmds, PolicyKind::Probe);
    CHECK(verdict.violations.size() == static_cast<std::size_t>(k));
    CHECK(verdict.safe == (k == 0));
  }
}

TEST_CASE("tokenizer round trip") {
  const std::string script = "SELECT a ; SHOW 'x;y'\nLIST  b;GET c";
  const auto cmds = tokenize_script(script);
  std::string joined;
  for (const auto& c : cmds) joined += c.raw_text + ";";
  const auto again = tokenize_script(joined);
  REQUIRE(again.size() == cmds.size());
  for (std::size_t i = 0; i < cmds.size(); ++i) CHECK(again[i] == cmds[i]);
}

TEST_CASE("policy file overrides and shipped defaults") {
  const auto shipped = SafetyPolicy::load(testutil::data_dir() / "policy.json");
  const auto& d = default_policy();
  CHECK(shipped.whitelist == d.whitelist);
  CHECK(shipped.blacklist == d.blacklist);
  CHECK(shipped.executor_deny == d.executor_deny);

  const auto p = SafetyPolicy::from_json_text(R"({"executor_deny": ["DROP", "TRUNCATE", "DELETE"]})");
  CHECK(p.whitelist == d.whitelist);
  CHECK_FALSE(validate_script(tokenize_script("DELETE FROM t", p), PolicyKind::Executor, p).safe);

  CHECK_THROWS_AS(SafetyPolicy::from_json_text("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(SafetyPolicy::from_json_text(R"({"whitelist": ["DROP"]})"), ConfigError);
  CHECK_THROWS_AS(SafetyPolicy::from_json_text(R"({"whitelist": "SELECT"})"), ConfigError);
  CHECK_THROWS_AS(SafetyPolicy::load("/nonexistent/policy.json"), ConfigError);
}
