#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "aoi/errors.hpp"
#include "aoi/memory.hpp"

using namespace aoi;

namespace {

RawContextEntry raw(double t, std::string text = "note", std::set<std::string> tags = {}) {
  RawContextEntry e;
  e.created_at = t;
  e.text = std::move(text);
  e.critical_tags = std::move(tags);
  return e;
}

CompressedContextEntry compressed(double t, std::set<std::string> sources, std::string text = "summary",
                                  std::set<std::string> tags = {}) {
  CompressedContextEntry e;
  e.created_at = t;
  e.summary_text = std::move(text);
  e.source_entry_ids = std::move(sources);
  e.preserved_tags = std::move(tags);
  return e;
}

Task task(std::string id, int priority, std::set<TaskId> deps = {}, TaskKind kind = TaskKind::Probe) {
  Task t;
  t.task_id = std::move(id);
  t.priority = priority;
  t.depends_on = std::move(deps);
  t.kind = kind;
  return t;
}

}  // namespace

TEST_CASE("raw entries round trip and expire after 24 hours") {
  MemoryStore m;
  const auto id = m.put_raw(raw(0));
  REQUIRE(m.get_raw(id, kHour) != nullptr);
  CHECK(m.get_raw(id, kHour)->ttl == 24 * kHour);
  CHECK(m.get_raw(id, 24 * kHour - 1) != nullptr);
  CHECK(m.get_raw(id, 24 * kHour) == nullptr);
  CHECK(m.get_raw(id, 24 * kHour + 1) == nullptr);
}

TEST_CASE("compressed entries live for 7 days") {
  MemoryStore m;
  const auto src = m.put_raw(raw(0));
  const auto id = m.put_compressed(compressed(0, {src}));
  CHECK(m.get_compressed(id, 7 * kDay - 1) != nullptr);
  CHECK(m.get_compressed(id, 7 * kDay + 1) == nullptr);
}

TEST_CASE("1000 puts give distinct retrievable ids") {
  MemoryStore m;
  std::set<std::string> ids;
  for (int i = 0; i < 1000; ++i) ids.insert(m.put_raw(raw(i)));
  CHECK(ids.size() == 1000);
  for (const auto& id : ids) CHECK(m.get_raw(id, 1000) != nullptr);
}

TEST_CASE("put rejections") {
  MemoryStore m;
  auto e = raw(0);
  e.entry_id = "fixed";
  m.put_raw(e);
  CHECK_THROWS_AS(m.put_raw(e), RejectedError);
  const auto src = m.put_raw(raw(0, "x", {"t1"}));
  CHECK_THROWS_AS(m.put_compressed(compressed(0, {})), RejectedError);
  CHECK_THROWS_AS(m.put_compressed(compressed(0, {"nope"})), RejectedError);
  CHECK_THROWS_AS(m.put_compressed(compressed(0, {src}, "s", {"t2"})), RejectedError);
  CHECK_NOTHROW(m.put_compressed(compressed(0, {src}, "s", {"t1"})));
}

TEST_CASE("compressed entries may cite sources that already expired") {
  MemoryStore m;
  const auto src = m.put_raw(raw(0, "x", {"t1"}));
  m.expire(25 * kHour);
  CHECK(m.get_raw(src, 25 * kHour) == nullptr);
  CHECK_NOTHROW(m.put_compressed(compressed(25 * kHour, {src}, "s", {"t1"})));
}

TEST_CASE("expire examples") {
  MemoryStore empty;
  CHECK(empty.expire(0) == 0);

  MemoryStore m;
  for (int i = 0; i < 3; ++i) m.put_raw(raw(0));
  CHECK(m.expire(25 * kHour) == 3);

  MemoryStore mixed;
  const auto src = mixed.put_raw(raw(0));
  mixed.put_compressed(compressed(0, {src}));
  CHECK(mixed.expire(25 * kHour) == 1);
  CHECK(mixed.raw_count() == 0);
  CHECK(mixed.compressed_count() == 1);

  CHECK_THROWS_AS(mixed.expire(kHour), ContractViolation);
}

TEST_CASE("query ranks by overlap, then recency, then id") {
  MemoryStore m;
  const auto one = m.put_raw(raw(10, "database timeout observed"));
  const auto two = m.put_raw(raw(5, "database connection timeout"));
  const auto newer = m.put_raw(raw(20, "database latency"));
  m.put_raw(raw(30, "unrelated text"));

  auto hits = m.query_context({"database", "connection"}, Layer::Raw, 40);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].entry_id == two);
  CHECK(hits[0].score == 2);
  CHECK(hits[1].entry_id == newer);
  CHECK(hits[2].entry_id == one);

  CHECK(m.query_context({"absent"}, Layer::Raw, 40).empty());
  CHECK(m.query_context({"database"}, Layer::Compressed, 40).empty());
  CHECK_THROWS_AS(m.query_context({}, Layer::Raw, 40), ContractViolation);
}

TEST_CASE("query excludes expired entries without an expire call") {
  MemoryStore m;
  m.put_raw(raw(0, "disk queue saturated"));
  CHECK(m.query_context({"disk", "queue"}, Layer::Raw, kHour).size() == 1);
  CHECK(m.query_context({"disk", "queue"}, Layer::Raw, 24 * kHour + 1).empty());
}

TEST_CASE("task queue order and gating") {
  MemoryStore m;
  m.enqueue_task(task("A", 1));
  m.enqueue_task(task("B", 5));
  CHECK(m.dequeue_task()->task_id == "B");
  CHECK(m.dequeue_task()->task_id == "A");
  CHECK_FALSE(m.dequeue_task().has_value());

  MemoryStore g;
  g.enqueue_task(task("B", 1));
  g.enqueue_task(task("A", 5, {"B"}));
  const auto first = g.dequeue_task();
  CHECK(first->task_id == "B");
  CHECK_FALSE(g.dequeue_task().has_value());  // A waits for B
  g.complete_task("B", TaskStatus::Done);
  CHECK(g.dequeue_task()->task_id == "A");

  MemoryStore f;
  f.enqueue_task(task("first", 3));
  f.enqueue_task(task("second", 3));
  CHECK(f.dequeue_task()->task_id == "first");
  CHECK(f.dequeue_task()->task_id == "second");
}

TEST_CASE("failed dependencies do not unlock dependents") {
  MemoryStore m;
  m.enqueue_task(task("B", 1));
  m.enqueue_task(task("A", 5, {"B"}));
  m.dequeue_task();
  m.complete_task("B", TaskStatus::Failed);
  CHECK_FALSE(m.dequeue_task().has_value());
  CHECK(m.runnable_tasks().empty());
}

TEST_CASE("dequeue by kind and queue errors") {
  MemoryStore m;
  m.enqueue_task(task("p", 9, {}, TaskKind::Probe));
  m.enqueue_task(task("x", 1, {}, TaskKind::Execute));
  CHECK(m.runnable_tasks().size() == 2);
  CHECK(m.dequeue_task(TaskKind::Execute)->task_id == "x");
  CHECK_FALSE(m.dequeue_task(TaskKind::Execute).has_value());
  CHECK_THROWS_AS(m.enqueue_task(task("p", 1)), RejectedError);
  CHECK_THROWS_AS(m.enqueue_task(task("q", 1, {"ghost"})), ContractViolation);
  CHECK_THROWS_AS(m.complete_task("p", TaskStatus::Done), ContractViolation);  // never dequeued
}

TEST_CASE("flat mode: no expiry, mixed layers, FIFO queue") {
  MemoryStore m(MemoryConfig{24 * kHour, 7 * kDay, true});
  const auto src = m.put_raw(raw(0, "alpha beta"));
  m.put_compressed(compressed(0, {src}, "alpha"));
  CHECK(m.expire(30 * kDay) == 0);
  CHECK(m.query_context({"alpha"}, Layer::Raw, 30 * kDay).size() == 2);

  m.enqueue_task(task("B", 1));
  m.enqueue_task(task("A", 5, {"B"}));
  m.enqueue_task(task("C", 9));
  CHECK(m.dequeue_task()->task_id == "B");
  CHECK(m.dequeue_task()->task_id == "A");  // no gating, no priority
}

TEST_CASE("queue safety over random DAGs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    std::vector<Task> tasks;
    for (int i = 0; i < n; ++i) {
      Task t = task("t" + std::to_string(i), static_cast<int>(rng() % 5));
      for (int j = 0; j < i; ++j)
        if (rng() % 4 == 0) t.depends_on.insert("t" + std::to_string(j));
      tasks.push_back(t);
    }
    MemoryStore m;
    for (const auto& t : tasks) m.enqueue_task(t);
    std::set<TaskId> done;
    std::vector<TaskId> order;
    while (auto t = m.dequeue_task()) {
      for (const auto& d : t->depends_on) CHECK(done.count(d) == 1);
      // Oracle: nothing runnable may outrank the chosen task.
      for (const auto& other : tasks) {
        if (done.count(other.task_id) || other.task_id == t->task_id) continue;
        if (std::find(order.begin(), order.end(), other.task_id) != order.end()) continue;
        const bool ready = std::all_of(other.depends_on.begin(), other.depends_on.end(),
                                       [&](const TaskId& d) { return done.count(d) > 0; });
        if (ready) CHECK(other.priority <= t->priority);
      }
      order.push_back(t->task_id);
      m.complete_task(t->task_id, TaskStatus::Done);
      done.insert(t->task_id);
    }
    CHECK(order.size() == tasks.size());
  }
}

TEST_CASE("random schedules never return an expired entry and conserve counts") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    MemoryStore m;
    std::map<std::string, std::pair<double, double>> born;  // id -> (created, ttl)
    std::vector<std::string> raw_ids;
    double now = 0;
    while (now < 10 * kDay) {
      now += static_cast<double>(rng() % 7200);
      switch (rng() % 4) {
        case 0:
        case 1: {
          const auto id = m.put_raw(raw(now, "event alpha"));
          born[id] = {now, 24 * kHour};
          raw_ids.push_back(id);
          break;
        }
        case 2:
          if (!raw_ids.empty()) {
            const auto id = m.put_compressed(compressed(now, {raw_ids[rng() % raw_ids.size()]}, "alpha"));
            born[id] = {now, 7 * kDay};
          }
          break;
        default:
          m.expire(now);
      }
      CHECK(m.total_puts() - m.total_expired() == m.live_count());
      for (const auto& h : m.query_context({"alpha"}, Layer::Raw, now)) CHECK(now - born[h.entry_id].first < born[h.entry_id].second);
      for (const auto& h : m.query_context({"alpha"}, Layer::Compressed, now)) CHECK(now - born[h.entry_id].first < born[h.entry_id].second);
    }
  }
}

TEST_CASE("journal writes one JSON object per entry") {
  const auto path = std::filesystem::temp_directory_path() / "aoi_journal_test.jsonl";
  std::filesystem::remove(path);
  {
    MemoryStore m;
    m.open_journal(path);
    const auto src = m.put_raw(raw(1, "a", {"tag"}));
    m.put_compressed(compressed(2, {src}, "b", {"tag"}));
  }
  std::ifstream in(path);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["kind"] == "raw");
  CHECK(rows[0]["ttl"] == 24 * kHour);
  CHECK(rows[1]["kind"] == "compressed");
  CHECK(rows[1]["tags"][0] == "tag");
  std::filesystem::remove(path);
}

TEST_CASE("context terms") {
  const auto t = context_terms("ERROR db-conn: Pool_Size=40, timeout.");
  CHECK(std::find(t.begin(), t.end(), "error") != t.end());
  CHECK(std::find(t.begin(), t.end(), "db-conn") != t.end());
  CHECK(std::find(t.begin(), t.end(), "timeout") != t.end());
}
