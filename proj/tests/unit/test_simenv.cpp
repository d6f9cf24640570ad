#include <doctest.h>

#include <cmath>
#include <set>

#include "aoi/catalog.hpp"
#include "aoi/errors.hpp"
#include "aoi/rng.hpp"
#include "aoi/simenv.hpp"
#include "helpers.hpp"

using namespace aoi;
using testutil::chain_scenario;

namespace {

StepOutcome run(Environment& env, const std::string& text) {
  const StepOutcome out = env.step(parse_command(text));
  env.advance_clock(out.duration);
  return out;
}

}  // namespace

TEST_CASE("catalog covers every category with at least three kinds") {
  const auto& cat = CommandCatalog::standard();
  CHECK(cat.faults().size() >= 12);
  for (auto c : kCategories) {
    int n = 0;
    for (const auto& f : cat.faults()) n += f.category == c;
    CHECK(n >= 3);
  }
  for (const auto& f : cat.faults()) {
    CHECK(f.effect.size() == kDefaultDimension);
    CHECK_FALSE(f.remediation.empty());
    double total = 0;
    for (const auto& s : f.remediation) total += s.fraction;
    CHECK(total == doctest::Approx(1.0));
    CHECK_NOTHROW(cat.diagnostic_for(f.kind));
  }
  CHECK_THROWS_AS(cat.at("no-such-kind"), PlanningError);
}

TEST_CASE("declared likelihoods are probabilities") {
  const auto& cat = CommandCatalog::standard();
  for (std::size_t d = 0; d < cat.diagnostics().size(); ++d) {
    CHECK(cat.positive_likelihood(d, "x", std::nullopt) == CommandCatalog::kFalsePositive);
    for (const auto& f : cat.faults()) {
      const double p = cat.positive_likelihood(d, "x", FaultRef{"x", f.kind});
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      CHECK(cat.positive_likelihood(d, "x", FaultRef{"y", f.kind}) == CommandCatalog::kFalsePositive);
    }
  }
}

TEST_CASE("catalog resolves concrete commands") {
  const auto& cat = CommandCatalog::standard();
  auto r = cat.resolve("SHOW pool-stats db");
  CHECK(r.role == CommandRole::Diagnostic);
  CHECK(r.component == "db");
  r = cat.resolve("RESTART connection-proxy db");
  CHECK(r.role == CommandRole::Remediation);
  CHECK(r.stage == 1);
  CHECK(cat.resolve("DROP TABLE sessions api").role == CommandRole::Harmful);
  CHECK(cat.resolve("GET metrics web").role == CommandRole::Refresh);
  CHECK(cat.resolve("FORMAT disk web").role == CommandRole::Unknown);
}

TEST_CASE("null scenario stays healthy under probing") {
  Environment env(chain_scenario({}), 1);
  const SystemState before = env.state();
  for (const auto& d : CommandCatalog::standard().diagnostics())
    run(env, CommandCatalog::instantiate(d.command, "api"));
  CHECK(same_ground_truth(before, env.state()));
  CHECK(env.resolved());
  for (const auto& c : env.state().components) CHECK(c.health == Health::Healthy);
}

TEST_CASE("faults appear at their injection time") {
  Environment env(chain_scenario({{"db", "memory-leak", 10}}), 1);
  env.advance_clock(9.5);
  CHECK(env.state().find("db")->health == Health::Healthy);
  CHECK_FALSE(env.state().find("db")->has_fault("memory-leak"));
  env.advance_clock(0.5);
  CHECK(env.state().find("db")->has_fault("memory-leak"));
  CHECK(env.state().find("db")->health != Health::Healthy);
  CHECK(env.first_injection_time() == 10);
}

TEST_CASE("advance by zero changes nothing") {
  Environment env(chain_scenario({{"db", "memory-leak", 0}}), 1);
  const SystemState before = env.state();
  env.advance_clock(0);
  CHECK(env.state() == before);
  CHECK_THROWS_AS(env.advance_clock(-1), ContractViolation);
}

TEST_CASE("faults propagate to dependents, attenuated") {
  Environment env(chain_scenario({{"db", "db-conn-exhausted", 0}}), 1);
  const auto lat = gauge_index(Gauge::Latency);
  const double base = baseline_gauges()[lat];
  const double own = env.state().find("db")->state_vector[lat] - base;
  const double one_hop = env.state().find("api")->state_vector[lat] - base;
  const double two_hop = env.state().find("web")->state_vector[lat] - base;
  CHECK(own == doctest::Approx(0.40));
  CHECK(one_hop == doctest::Approx(0.5 * own));
  CHECK(two_hop == doctest::Approx(0.25 * own));
  CHECK(env.state().find("api")->active_faults.empty());
}

TEST_CASE("same spec and seed give identical log streams") {
  auto logs = [](std::uint64_t seed) {
    Environment env(chain_scenario({{"api", "cpu-saturation", 30}}), seed);
    env.advance_clock(600);
    std::string out;
    for (const auto& l : env.take_logs()) out += l.render() + "\n";
    return out;
  };
  CHECK(logs(3) == logs(3));
  CHECK(logs(3) != logs(4));
}

TEST_CASE("log lines carry planted markers") {
  const auto spec = chain_scenario({{"api", "cert-expired", 0}});
  Environment env(spec, 2);
  env.advance_clock(300);
  std::set<std::string> seen;
  for (const auto& l : env.take_logs()) {
    CHECK(l.tags == parse_markers(l.text));
    seen.insert(l.tags.begin(), l.tags.end());
  }
  std::set<std::string> planted;
  for (const auto& s : Environment::planted_spans(spec)) planted.insert(tag_of(s));
  for (const auto& t : seen) CHECK(planted.count(t) == 1);
  CHECK(seen.count(tag_of(CommandCatalog::standard().at("cert-expired").error_code)) == 1);
}

TEST_CASE("diagnostic outcomes follow the declared likelihood") {
  // Chi-squared with one degree of freedom; 6.635 is the 0.01 critical value.
  const auto& cat = CommandCatalog::standard();
  for (const char* kind : {"db-conn-exhausted", "cert-expired", "memory-leak"}) {
    Environment env(chain_scenario({{"db", kind, 0}}), 99);
    const std::size_t d = cat.diagnostic_for(kind);
    const std::string cmd = CommandCatalog::instantiate(cat.diagnostics()[d].command, "db");
    const double p = cat.positive_likelihood(d, "db", FaultRef{"db", kind});
    const int n = 1000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += *env.step(parse_command(cmd)).anomaly ? 1 : 0;
    const double e1 = n * p, e0 = n * (1 - p);
    const double chi2 = (hits - e1) * (hits - e1) / e1 + ((n - hits) - e0) * ((n - hits) - e0) / e0;
    CHECK(chi2 < 6.635);
  }
}

TEST_CASE("read-only commands never change ground truth") {
  Environment env(chain_scenario({{"api", "version-mismatch", 0}, {"db", "disk-io-contention", 0}}), 5);
  const auto& cat = CommandCatalog::standard();
  for (const char* c : {"web", "api", "db"}) {
    for (const auto& d : cat.diagnostics()) {
      const SystemState before = env.state();
      const auto out = env.step(parse_command(CommandCatalog::instantiate(d.command, c)));
      CHECK(same_ground_truth(before, env.state()));
      CHECK(out.anomaly.has_value());
    }
    const SystemState before = env.state();
    env.step(parse_command(CommandCatalog::instantiate(CommandCatalog::kRefreshCommand, c)));
    CHECK(same_ground_truth(before, env.state()));
  }
  CHECK(env.mutation_count() == 0);
}

TEST_CASE("every catalog remediation restores a fresh fault") {
  for (const auto& f : CommandCatalog::standard().faults()) {
    CAPTURE(f.kind);
    const auto spec = chain_scenario({{"api", f.kind, 0}});
    Environment env(spec, 7);
    CHECK_FALSE(env.resolved());
    for (const auto& cmd : spec.ground_truth_remediation) {
      const auto out = run(env, cmd);
      CHECK_FALSE(out.error);
      CHECK_FALSE(out.critical);
    }
    CHECK(env.distance_to_target() < Environment::kResolvedDistance);
    CHECK(env.resolved());
    CHECK(env.state().find("api")->health == Health::Healthy);
  }
}

TEST_CASE("harmful commands are critical and worsen a gauge") {
  for (const auto& h : CommandCatalog::standard().harmful()) {
    Environment env(chain_scenario({}), 1);
    const double before = env.distance_to_target();
    const auto out = env.step(parse_command(CommandCatalog::instantiate(h, "api")));
    CHECK(out.critical);
    bool worse = false;
    for (std::size_t g = 0; g < out.before.size(); ++g) worse |= out.after[g] != out.before[g];
    CHECK(worse);
    CHECK(env.distance_to_target() > before);
  }
}

TEST_CASE("unknown and role-mismatched commands are error outcomes") {
  Environment env(chain_scenario({}), 1);
  auto out = env.step(parse_command("FORMAT disk api"));
  CHECK(out.error);
  CHECK_FALSE(out.critical);
  out = env.step(parse_command("SHOW pool-stats nowhere"));
  CHECK(out.error);
  CHECK(env.mutation_count() == 0);
}

TEST_CASE("wrong remediation disrupts the service") {
  Environment env(chain_scenario({}), 1);
  run(env, "RESTART web-worker api");
  CHECK(env.state().find("api")->has_fault("service-disruption"));
}

TEST_CASE("snapshot and restore") {
  Environment env(chain_scenario({{"db", "memory-leak", 0}}), 3);
  const SystemState snap = env.snapshot();
  run(env, "RECYCLE heap db");
  CHECK_FALSE(same_ground_truth(snap, env.state()));
  const double t = env.now();
  env.restore(snap);
  CHECK(same_ground_truth(snap, env.state()));
  CHECK(env.now() == t);  // the clock never rewinds

  Environment other(chain_scenario({}), 3);
  SystemState foreign = other.state();
  foreign.components[0].component_id = "elsewhere";
  CHECK_THROWS_AS(env.restore(foreign), ShapeError);
}

TEST_CASE("restore re-arms injections scheduled after the snapshot") {
  Environment env(chain_scenario({{"db", "memory-leak", 100}}), 3);
  const SystemState snap = env.snapshot();
  env.advance_clock(150);
  CHECK(env.state().find("db")->has_fault("memory-leak"));
  env.restore(snap);
  CHECK_FALSE(env.state().find("db")->has_fault("memory-leak"));
  env.advance_clock(1);
  CHECK(env.state().find("db")->has_fault("memory-leak"));
}

TEST_CASE("an unremediated fault escalates") {
  EnvOptions opt;
  opt.escalation_scale = 0.1;
  Environment env(chain_scenario({{"api", "cert-expired", 0}}), 3, opt);
  env.advance_clock(0.1 * 1500 * 1.2);
  CHECK(env.escalated());
  CHECK_FALSE(env.resolved());
  CHECK(env.state().find("api")->health == Health::Failed);
}

TEST_CASE("unavailable environment is a transport error") {
  Environment env(chain_scenario({}), 1);
  env.set_available(false);
  CHECK_THROWS_AS(env.step(parse_command("SHOW pool-stats db")), TransportError);
  CHECK_THROWS_AS(env.snapshot(), TransportError);
}

TEST_CASE("monitoring readings") {
  Environment env(chain_scenario({{"db", "memory-leak", 0}}), 3);
  const SystemState m = env.monitor();
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    CHECK(m.components[i].active_faults.empty());
    CHECK(m.components[i].state_vector == env.state().components[i].state_vector);
  }
  EnvOptions noisy;
  noisy.metric_noise = 0.05;
  Environment nenv(chain_scenario({{"db", "memory-leak", 0}}), 3, noisy);
  const SystemState a = nenv.monitor(), b = nenv.monitor();
  CHECK(a == b);
  CHECK(a.components[0].state_vector != nenv.state().components[0].state_vector);
  for (const auto& c : a.components)
    for (double x : c.state_vector) CHECK((x >= 0.0 && x <= 1.0));
}

TEST_CASE("scenario files validate") {
  auto spec = chain_scenario({{"db", "memory-leak", 0}});
  const auto round = ScenarioSpec::from_json_text(spec.to_json_text());
  CHECK(round.to_json_text() == spec.to_json_text());

  auto bad = spec;
  bad.injected_faults[0].kind = "gremlins";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.topology.edges.push_back({"db", "web"});
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.ground_truth_remediation.push_back("DROP TABLE sessions db");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(ScenarioSpec::from_json_text("{"), ConfigError);
}

TEST_CASE("bundled corpus") {
  std::map<Category, int> per;
  int cascades = 0, total = 0;
  for (const auto& e : std::filesystem::directory_iterator(testutil::data_dir() / "scenarios")) {
    const auto s = ScenarioSpec::load(e.path());
    CHECK_NOTHROW(s.validate());
    ++per[s.category];
    ++total;
    cascades += s.scenario_id.rfind("cascade", 0) == 0;
  }
  CHECK(total >= 50);
  for (auto c : kCategories) CHECK(per[c] >= 12);
  CHECK(cascades >= 1);
}

TEST_CASE("keyed draws are independent of call order") {
  CHECK(keyed_unit(1, "a", 2) == keyed_unit(1, "a", 2));
  CHECK(keyed_unit(1, "a", 2) != keyed_unit(1, "b", 2));
  CHECK(keyed_unit(1, "a", 2) != keyed_unit(2, "a", 2));
}
