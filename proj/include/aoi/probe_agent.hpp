#pragma once

// Read-only information gathering: catalog-driven probe scripts, validated
// under the deny-by-default probe policy, run with error-continue semantics.

#include <optional>
#include <string>
#include <vector>

#include "aoi/catalog.hpp"
#include "aoi/memory.hpp"
#include "aoi/observer.hpp"
#include "aoi/safety.hpp"
#include "aoi/simenv.hpp"

namespace aoi {

struct ProbeObservation {
  Command command;
  std::string outcome;
  bool error = false;
  ComponentId target;
  std::optional<std::size_t> diagnostic;
  std::optional<bool> anomaly;
};

struct ProbeResult {
  TaskId task_id;
  std::vector<ProbeObservation> observations;
  std::vector<std::string> raw_entry_ids;
  double information_gain = 0.0;  // written back by the observer
  double duration = 0.0;
  double cpu_seconds = 0.0;
};

struct ProbeConfig {
  double hypothesis_threshold = 0.05;
  std::size_t max_commands = 16;
};

/// Diagnostic commands for the task's live hypotheses, highest posterior
/// first, de-duplicated and capped. PlanningError when the task has no
/// target components or nothing to probe.
std::vector<Command> generate_probe_script(const Task& task, const FaultBelief& belief,
                                           const ProbeConfig& config = {},
                                           const CommandCatalog& catalog = CommandCatalog::standard());

class ProbeAgent {
 public:
  explicit ProbeAgent(ProbeConfig config = {}, SafetyPolicy policy = default_policy())
      : config_(config), policy_(std::move(policy)) {}

  const ProbeConfig& config() const { return config_; }

  ProbeResult run(const Task& task, const FaultBelief& belief, Environment& env, MemoryStore& memory) const;

  /// Validates then runs an explicit script. An unsafe script throws
  /// RejectedError("unsafe script rejected") before any command executes.
  /// The clock is not advanced; the caller advances it by result.duration.
  ProbeResult run_script(const TaskId& task_id, const std::vector<Command>& script, Environment& env,
                         MemoryStore& memory) const;

 private:
  ProbeConfig config_;
  SafetyPolicy policy_;
};

}  // namespace aoi
