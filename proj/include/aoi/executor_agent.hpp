#pragma once

// State-changing work: checkpoint, catalog plan, stepwise execution with
// optional state refresh, critical-failure detection and full rollback.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aoi/catalog.hpp"
#include "aoi/memory.hpp"
#include "aoi/safety.hpp"
#include "aoi/simenv.hpp"

namespace aoi {

struct Checkpoint {
  std::string checkpoint_id;
  double captured_at = 0.0;
  SystemState state_snapshot;
};

struct PlannedAction {
  Command command;
  bool requires_state_refresh = false;
  ComponentId component;
  GaugeVector expected_delta;
};

struct ActionPlan {
  TaskId task_id;
  std::vector<PlannedAction> actions;
  bool aggressive = false;  // built from a harmful shortcut
};

enum class ExecOutcome { Completed, RolledBack, PartialFailure };

std::string_view to_string(ExecOutcome o);

struct ActionOutcome {
  std::string command;
  bool success = false;
  bool critical = false;
  bool diverged = false;
  GaugeVector observed_delta;
  std::string text;
  double distance_before = 0.0;  // ground truth, recorded for evaluation only
  double distance_after = 0.0;
  double time = 0.0;
};

struct ExecResult {
  TaskId task_id;
  std::size_t executed = 0;
  ExecOutcome outcome = ExecOutcome::Completed;
  std::optional<std::string> rollback_checkpoint;
  std::vector<ActionOutcome> action_outcomes;
  std::vector<std::string> raw_entry_ids;
  std::size_t refreshes = 0;
  double cpu_seconds = 0.0;
};

struct ExecutorConfig {
  double divergence_tolerance = 0.3;
  double staleness_bound = 60.0;
  bool checkpoints = true;  // off: no checkpoint, no rollback
  bool refresh = true;      // off: never re-read state mid-plan
  double checkpoint_duration = 15.0;
  double rollback_duration = 60.0;
  double checkpoint_cpu = 0.5;
  double rollback_cpu = 2.0;
};

/// Per-component time of the latest diagnostic evidence.
using StalenessView = std::function<double(const ComponentId&)>;

/// Concatenates catalog remediation for the task's faults, dependencies
/// first. With `aggressive`, faults that declare a harmful shortcut use it
/// instead. Throws PlanningError for an unknown kind or a plan that fails
/// executor validation.
ActionPlan generate_plan(const Task& task, const Topology& topology, const StalenessView& last_update, double now,
                         const ExecutorConfig& config = {}, bool aggressive = false,
                         const SafetyPolicy& policy = default_policy(),
                         const CommandCatalog& catalog = CommandCatalog::standard());

class ExecutorAgent {
 public:
  explicit ExecutorAgent(ExecutorConfig config = {}) : config_(config) {}
  const ExecutorConfig& config() const { return config_; }

  Checkpoint create_checkpoint(Environment& env);

  /// Runs the plan, advancing the environment clock as actions take time.
  /// Throws EngineError when a rollback does not restore the checkpoint.
  ExecResult execute_plan(const ActionPlan& plan, Environment& env, MemoryStore& memory);

 private:
  ExecutorConfig config_;
  std::uint64_t checkpoints_ = 0;
};

}  // namespace aoi
