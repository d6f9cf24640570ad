#pragma once

// The coordinating agent: a categorical belief over (component, fault kind)
// hypotheses plus no-fault, task complexity and decomposition, and the
// probe-versus-execute scheduler with balance factor lambda.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aoi/catalog.hpp"
#include "aoi/core_model.hpp"
#include "aoi/memory.hpp"

namespace aoi {

using Hypothesis = std::optional<FaultRef>;  // nullopt: no fault

class FaultBelief {
 public:
  FaultBelief() = default;
  /// Normalizes `weights`; ContractViolation when they are negative or sum to 0.
  FaultBelief(std::vector<Hypothesis> hypotheses, std::vector<double> weights);
  static FaultBelief uniform(std::vector<Hypothesis> hypotheses);

  std::size_t size() const { return hypotheses_.size(); }
  const std::vector<Hypothesis>& hypotheses() const { return hypotheses_; }
  const std::vector<double>& probabilities() const { return probs_; }
  double entropy() const { return entropy_; }  // bits

  double probability(const FaultRef& f) const;
  double no_fault() const;
  /// Highest-posterior hypothesis; ties go to the earlier one.
  std::size_t map_index() const;
  /// Fault hypotheses by decreasing posterior (no-fault excluded).
  std::vector<std::pair<FaultRef, double>> ranked() const;

  /// posterior ∝ prior × likelihood. Returns entropy_before - entropy_after.
  /// Throws DegenerateEvidence, leaving the belief untouched, when every
  /// hypothesis gets zero mass.
  double update(std::span<const double> likelihood);

 private:
  void recompute_entropy();

  std::vector<Hypothesis> hypotheses_;
  std::vector<double> probs_;
  double entropy_ = 0.0;
};

double shannon_entropy_bits(std::span<const double> probabilities);

/// C(τ) = |targets| + |distinct suspected kinds| + 2·[kinds span >1 category].
double estimate_complexity(const Task& task, const CommandCatalog& catalog = CommandCatalog::standard());

struct DecomposeParams {
  double theta_complex = 4.0;
  double suspect_threshold = 0.05;
  double confirm_threshold = 0.9;
  double execute_threshold = 0.5;
};

/// Returns {task} when C(τ) ≤ θ; otherwise one Probe subtask per suspected,
/// unconfirmed pair and one Execute subtask per high-posterior pair. Priority
/// is the number of transitive dependents; an Execute on a dependent waits for
/// the Execute on its dependency. PlanningError on a cyclic topology.
std::vector<Task> decompose(const Task& task, const FaultBelief& belief, const Topology& topology,
                            const DecomposeParams& params = {},
                            const CommandCatalog& catalog = CommandCatalog::standard());

struct PendingProbe {
  TaskId task_id;
  double diagnosticity = 0.0;
};

struct PendingExecute {
  TaskId task_id;
  double current_distance = 0.0;
  double predicted_distance = 0.0;
  double posterior = 1.0;

  /// posterior · clip((current - predicted) / current, 0, 1).
  double expected_progress() const;
};

struct QueueView {
  std::vector<PendingProbe> probes;
  std::vector<PendingExecute> executes;
};

struct ScheduleDecision {
  std::optional<TaskKind> chosen;  // nullopt: nothing runnable
  TaskId task_id;
  double probe_reward = 0.0;
  double execute_reward = 0.0;
  double lambda = 0.35;
};

/// probe_reward = λ·max clip(H·D, 0, 1); execute_reward = (1-λ)·max expected
/// progress. Argmax with ties to Execute; a lone runnable kind always wins.
ScheduleDecision schedule(double entropy_bits, const QueueView& view, double lambda);

struct ObserverConfig {
  double lambda = 0.35;
  DecomposeParams decompose;
  double symptom_sigma = 0.25;
  double symptom_threshold = 0.05;  // per-component deviation that counts as a symptom
  double no_fault_prior = 0.2;      // prior mass of "no fault" before symptom evidence
  double q_direct = 0.6;
  double q_propagated = 0.4;
  double q_noise = 0.02;
  double remediation_fail_true = 0.1;
  double remediation_fail_other = 0.95;
  std::size_t context_capacity = 1024;  // tokens of context read per cycle
};

/// Predicted gauges of all components if `h` were the only fault.
SystemState predict_state(const SystemState& shape, const Hypothesis& h, const Topology& topology,
                          const CommandCatalog& catalog = CommandCatalog::standard());

/// Gaussian symptom likelihood over every (component, kind) pair plus no-fault.
FaultBelief symptom_prior(const SystemState& observed, const Topology& topology, const ObserverConfig& config,
                          const CommandCatalog& catalog = CommandCatalog::standard());

/// One log-derived fact: a component's line names a fault kind, or blames an
/// upstream component.
struct LogMention {
  ComponentId component;
  std::optional<FaultKind> kind;
  std::optional<ComponentId> upstream;

  auto operator<=>(const LogMention&) const = default;
};

std::vector<LogMention> parse_mentions(std::string_view text, const Topology& topology,
                                       const CommandCatalog& catalog = CommandCatalog::standard());

/// Likelihood row of one mention over the belief's hypotheses.
std::vector<double> mention_likelihood(const LogMention& m, const FaultBelief& belief, const Topology& topology,
                                       const ObserverConfig& config);

/// Likelihood row of one diagnostic outcome.
std::vector<double> diagnostic_likelihood(std::size_t diagnostic, const ComponentId& target, bool anomaly,
                                          const FaultBelief& belief,
                                          const CommandCatalog& catalog = CommandCatalog::standard());

class Observer {
 public:
  Observer(Topology topology, ObserverConfig config, const CommandCatalog& catalog = CommandCatalog::standard());

  const ObserverConfig& config() const { return config_; }
  const FaultBelief& belief() const { return belief_; }
  const SystemState& observed() const { return observed_; }
  int episodes() const { return episodes_; }

  /// Takes a monitoring reading. Starts a new episode when a component turned
  /// symptomatic, all symptoms cleared, or a fix was reported; after the last
  /// two, context written earlier is no longer read. Returns true on a new
  /// episode.
  bool observe(const SystemState& metrics, double now);
  void report_fix() { fix_reported_ = true; }

  std::set<ComponentId> symptomatic() const;

  /// Reads up to the context capacity from `layer`, applying each unseen
  /// entry's mentions once per episode. Returns tokens read.
  std::size_t read_context(const MemoryStore& memory, Layer layer, double now);

  /// Applies a likelihood row; information gain is returned (0 on degenerate evidence).
  double apply(std::span<const double> likelihood);
  double apply_diagnostic(std::size_t diagnostic, const ComponentId& target, bool anomaly, double now);
  void apply_failed_remediation(const FaultRef& f);

  /// Time the belief last received component-specific evidence.
  double last_update(const ComponentId& c) const;
  void touch(const ComponentId& c, double now) { last_update_[c] = now; }

  /// The incident-level task for this cycle.
  Task root_task() const;
  /// decompose(root_task()), or the atomic root resolved to Probe/Execute.
  std::vector<Task> plan() const;
  /// Expected-progress inputs for an Execute on `f`.
  PendingExecute execute_view(const TaskId& id, const FaultRef& f) const;
  double probe_diagnosticity(const Task& t) const;

  std::size_t degenerate_events() const { return degenerate_; }

 private:
  Topology topology_;
  ObserverConfig config_;
  const CommandCatalog& catalog_;
  FaultBelief belief_;
  SystemState observed_;
  std::set<ComponentId> symptoms_;
  bool fix_reported_ = false;
  bool started_ = false;
  double stale_before_ = -1.0;
  int episodes_ = 0;
  std::set<LogMention> seen_mentions_;
  std::set<std::string> read_entries_;
  std::map<ComponentId, double> last_update_;
  std::size_t degenerate_ = 0;
};

}  // namespace aoi
