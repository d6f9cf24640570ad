#pragma once

// The orchestration loop. One Engine drives one scenario run: ingest logs
// into memory (compressing them when enabled), let the observer update its
// belief, decompose and schedule, and dispatch one probe or execute task per
// cycle. Concurrent runs share a fixed pool of agents.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aoi/catalog.hpp"
#include "aoi/compressor.hpp"
#include "aoi/executor_agent.hpp"
#include "aoi/memory.hpp"
#include "aoi/observer.hpp"
#include "aoi/probe_agent.hpp"
#include "aoi/simenv.hpp"

namespace aoi {

struct PoolSizes {
  int probe = 8;
  int executor = 10;
  int compressor = 4;
};

struct RemoteSettings {
  std::string endpoint = "http://127.0.0.1:8080/v1/completions";
  std::string model = "summarizer";
  std::string token_env = "AOI_LLM_TOKEN";
  double timeout_seconds = 30.0;
  int max_retries = 2;
  int max_in_flight = 4;
};

struct EngineConfig {
  double lambda = 0.35;
  double theta_complex = 4.0;
  std::size_t window_size = 768;
  double overlap_ratio = 0.5;
  double target_ratio = 0.72;
  double raw_ttl = 24 * kHour;
  double compressed_ttl = 7 * kDay;
  std::string summarizer = "extractive";
  RemoteSettings remote;

  bool compressor = true;
  bool dynamic_scheduling = true;
  bool layered_memory = true;
  bool multi_agent = true;

  int step_budget = 500;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  ObserverConfig observer;
  ProbeConfig probe;
  ExecutorConfig executor;
  EnvOptions env{.escalation_scale = 0.2};  // incidents left alone go critical within minutes
  PoolSizes pools;

  double compression_seconds = 2.3;  // per ingest batch
  double idle_seconds = 30.0;
  double decision_cpu = 0.02;
  double read_seconds_per_token = 0.01;  // decision latency grows with the context read
  double aggressive_after = 900.0;  // incident age after which a shortcut gets proposed

  /// Rejects any out-of-range field with ConfigError.
  void validate() const;
  /// Row label for reports: "full", "w/o compressor", ...
  std::string label() const;
};

enum class EventType {
  Ingest, Decision, Probe, Execute, Rollback, HarmfulProposed, HarmfulBlocked, Idle, Resolved, Escalated, Budget
};

std::string_view to_string(EventType t);

struct TraceEvent {
  double time = 0.0;
  EventType type = EventType::Decision;
  std::string detail;
};

struct MutatingAction {
  double time = 0.0;
  std::string command;
  double distance_before = 0.0;
  double distance_after = 0.0;
  bool harmful = false;
};

struct CompressionEvent {
  double time = 0.0;
  std::size_t raw_tokens = 0;
  std::size_t compressed_tokens = 0;
  std::set<std::string> truth_tags;
  std::set<std::string> preserved_tags;
};

struct RunTrace {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
  double start_time = 0.0;  // first fault injection
  double end_time = 0.0;
  bool complete = false;
  bool resolved = false;
  bool escalated = false;
  std::vector<MutatingAction> mutations;
  std::vector<CompressionEvent> compressions;
  std::size_t harmful_proposed = 0;
  std::size_t harmful_executed = 0;
  std::size_t tasks_completed = 0;
  std::size_t probes = 0;
  std::size_t executes = 0;
  std::size_t rollbacks = 0;
  std::size_t cycles = 0;
  double cpu_seconds = 0.0;
  SystemState final_state;
};

/// Agent slots shared by the runs of one concurrency group.
class AgentPools {
 public:
  enum class Kind { Probe, Executor, Compressor };
  struct Slot {
    Kind kind;
    std::size_t index;
    double start;
  };

  explicit AgentPools(PoolSizes sizes);
  /// Earliest-free slot of `kind`; start = max(request, slot free time).
  Slot acquire(Kind kind, double request_time);
  void release(const Slot& slot, double end_time);

 private:
  std::vector<double>& slots(Kind kind);
  std::vector<double> probe_, executor_, compressor_;
};

std::unique_ptr<Summarizer> make_summarizer(const EngineConfig& config);

class Engine {
 public:
  Engine(const ScenarioSpec& spec, std::uint64_t seed, const EngineConfig& config);

  bool done() const { return trace_.complete; }
  double now() const { return env_.now(); }
  const Environment& environment() const { return env_; }
  const MemoryStore& memory() const { return memory_; }
  const Observer& observer() const { return observer_; }
  const RunTrace& trace() const { return trace_; }

  /// One orchestration cycle.
  void step(AgentPools& pools);
  /// Runs to termination with private pools.
  RunTrace run();

 private:
  void ingest(AgentPools& pools);
  bool check_termination();
  void run_probe_task(const Task& task, AgentPools& pools);
  void run_execute_task(const Task& task, AgentPools& pools);
  void single_agent_cycle(AgentPools& pools);
  void event(EventType t, std::string detail);
  void finish();

  EngineConfig config_;
  Environment env_;
  MemoryStore memory_;
  Observer observer_;
  ProbeAgent probe_agent_;
  ExecutorAgent executor_agent_;
  std::unique_ptr<Summarizer> summarizer_;
  CompressionParams compression_;
  RunTrace trace_;
  std::optional<TaskKind> last_kind_;
  bool aggressive_failed_ = false;
  std::uint64_t task_serial_ = 0;
};

/// Runs `specs` × seeds. `concurrency` > 1 groups that many runs per shared
/// pool set; host threads parallelize independent groups. Results come back
/// in (spec, seed) order.
std::vector<RunTrace> run_suite(const std::vector<ScenarioSpec>& specs, const EngineConfig& config,
                                int concurrency = 1, int workers = 1);

/// Run seed of one (scenario, suite seed) pair.
std::uint64_t run_seed(const ScenarioSpec& spec, std::uint64_t suite_seed);

}  // namespace aoi
