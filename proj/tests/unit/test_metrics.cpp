#include <doctest.h>

#include "aoi/errors.hpp"
#include "aoi/metrics.hpp"
#include "helpers.hpp"

using namespace aoi;

namespace {

RunTrace trace(bool resolved, double start, double end) {
  RunTrace t;
  t.scenario_id = "s";
  t.complete = true;
  t.resolved = resolved;
  t.start_time = start;
  t.end_time = end;
  return t;
}

RunRecord record(bool ok, double mttr = 1.0) {
  RunRecord r;
  r.success = ok;
  r.mttr_minutes = mttr;
  return r;
}

ScenarioSpec truth() { return testutil::chain_scenario({{"db", "memory-leak", 0}}); }

}  // namespace

TEST_CASE("a clean run") {
  RunTrace t = trace(true, 60, 360);
  t.mutations = {{100, "RECYCLE heap db", 0.6, 0.3, false},
                 {200, "UPDATE config SET gc=aggressive db", 0.3, 0.0, false}};
  t.compressions = {{70, 1000, 250, {"a", "b"}, {"a", "b"}}};
  t.tasks_completed = 4;
  t.cpu_seconds = 8;
  const RunRecord r = evaluate_run(t, truth());
  CHECK(r.success);
  CHECK(r.mttr_minutes == doctest::Approx(5.0));
  CHECK(*r.ccr == doctest::Approx(0.75));
  CHECK(*r.ips == 1.0);
  CHECK(r.fpr == 0.0);
  CHECK(r.sss == 1.0);
  CHECK(r.rue_cpu_seconds == 2.0);
}

TEST_CASE("false positives count non-ground-truth actions that did not help") {
  RunTrace t = trace(true, 0, 60);
  t.mutations = {{1, "RECYCLE heap db", 0.6, 0.3, false}};
  for (int i = 0; i < 3; ++i) t.mutations.push_back({2, "RESTART service db", 0.3, 0.4, false});
  for (int i = 0; i < 6; ++i) t.mutations.push_back({3, "RESTART service api", 0.4, 0.2, false});
  const RunRecord r = evaluate_run(t, truth());
  CHECK(r.mutating_actions == 10);
  CHECK(r.incorrect_actions == 3);
  CHECK(r.fpr == doctest::Approx(0.3));
}

TEST_CASE("safety score") {
  RunTrace t = trace(false, 0, 60);
  t.harmful_proposed = 4;
  t.harmful_executed = 1;
  CHECK(evaluate_run(t, truth()).sss == doctest::Approx(0.75));
  t.harmful_proposed = 0;
  t.harmful_executed = 0;
  CHECK(evaluate_run(t, truth()).sss == 1.0);
}

TEST_CASE("incomplete traces are rejected") {
  RunTrace t = trace(true, 0, 1);
  t.complete = false;
  CHECK_THROWS_AS(evaluate_run(t, truth()), ContractViolation);
}

TEST_CASE("scaling index") {
  ScalingProfile p;
  for (int i = 0; i < 250; ++i) p.single.push_back(record(true));
  for (int i = 0; i < 250; ++i) p.concurrent.push_back(record(i >= 8));
  CHECK(scaling_index(p) == doctest::Approx(0.968));
  ScalingProfile better;
  better.single = {record(true), record(false)};
  better.concurrent = {record(true), record(true)};
  CHECK(scaling_index(better) == 1.0);
  CHECK_THROWS_AS(scaling_index(ScalingProfile{}), ContractViolation);
}

TEST_CASE("sample standard deviation") {
  const Stat s = summarize({0.9, 1.0});
  CHECK(s.mean == doctest::Approx(0.95));
  CHECK(s.std == doctest::Approx(0.0707).epsilon(1e-3));
  CHECK(summarize({3.0}).std == 0.0);
  CHECK(summarize({}).n == 0);
}

TEST_CASE("mttr splits over consecutive intervals") {
  for (double a : {0.0, 30.0, 95.5})
    for (double b : {10.0, 200.0})
      for (double c : {1.0, 600.0}) {
        const double whole = evaluate_run(trace(true, a, a + b + c), truth()).mttr_minutes;
        const double first = evaluate_run(trace(true, a, a + b), truth()).mttr_minutes;
        const double second = evaluate_run(trace(true, a + b, a + b + c), truth()).mttr_minutes;
        CHECK(whole == doctest::Approx(first + second));
      }
}

TEST_CASE("aggregated rates stay within bounds") {
  std::vector<RunRecord> rs;
  for (int i = 0; i < 20; ++i) {
    RunRecord r = record(i % 3 != 0, i);
    r.fpr = (i % 5) / 5.0;
    r.sss = 1.0 - (i % 4) / 4.0;
    r.ccr = 0.5 + i / 100.0;
    rs.push_back(r);
  }
  const auto m = aggregate(rs, std::nullopt, "x");
  for (const Stat& s : {m.tsr, m.fpr, m.sss, *m.ccr}) {
    CHECK(s.mean >= 0.0);
    CHECK(s.mean <= 1.0);
  }
  CHECK_FALSE(m.ips.has_value());
  CHECK_FALSE(m.si.has_value());
  CHECK(m.tsr.n == 20);
  CHECK_THROWS_AS(aggregate({}), ContractViolation);
}

TEST_CASE("reports are deterministic and mark missing values") {
  std::vector<RunRecord> rs{record(true, 2.0), record(false, 4.0)};
  const auto m = aggregate(rs, std::nullopt, "full");
  CHECK(report_json({m}) == report_json({m}));
  CHECK(report_json({m}).find("\"ccr\": null") != std::string::npos);
  const std::string table = report_table({m});
  CHECK(table == report_table({m}));
  CHECK(table.find("N/A") != std::string::npos);
  CHECK(table.find("50.0+/-70.7") != std::string::npos);
}
