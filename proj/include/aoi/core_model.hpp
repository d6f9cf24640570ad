#pragma once

// Shared domain vocabulary: component and system state vectors, tasks,
// the weighted operational cost, and the state-distance primitive.

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aoi {

using ComponentId = std::string;
using FaultKind = std::string;
using TaskId = std::string;

/// Gauges of the default state vector, in vector order.
enum class Gauge : std::size_t { Cpu = 0, Memory, Latency, ErrorRate, Availability };

inline constexpr std::size_t kDefaultDimension = 5;
inline constexpr std::array<std::string_view, kDefaultDimension> kGaugeNames = {
    "cpu", "memory", "latency", "error_rate", "availability"};

constexpr std::size_t gauge_index(Gauge g) { return static_cast<std::size_t>(g); }

enum class Health { Healthy, Degraded, Failed };

std::string_view to_string(Health h);

/// One fault instance living on a component. Onset, escalation deadline and
/// remediation progress travel with the state so that checkpoints capture them.
struct ActiveFault {
  FaultKind kind;
  double onset = 0.0;
  double deadline = 0.0;
  int remediation_stage = 0;
  std::vector<double> contribution;  // current gauge deviation caused by this fault

  bool operator==(const ActiveFault&) const = default;
};

struct ComponentState {
  ComponentId component_id;
  std::vector<double> state_vector;
  Health health = Health::Healthy;
  std::vector<ActiveFault> active_faults;  // sorted by kind, unique

  bool has_fault(std::string_view kind) const;
  const ActiveFault* fault(std::string_view kind) const;
  ActiveFault* fault(std::string_view kind);

  bool operator==(const ComponentState&) const = default;
};

struct SystemState {
  double time = 0.0;
  std::vector<ComponentState> components;

  const ComponentState* find(std::string_view id) const;
  ComponentState* find(std::string_view id);
  std::size_t dimension() const;

  /// Throws ShapeError / ContractViolation when an invariant does not hold:
  /// unique ids, uniform dimension, Failed implies at least one fault.
  void validate() const;

  bool operator==(const SystemState&) const = default;
};

/// Field-for-field equality of component states, ignoring the clock.
bool same_ground_truth(const SystemState& a, const SystemState& b);

struct CostWeights {
  double alpha = 1.0;  // completion time
  double beta = 0.0;   // resource cost
  double gamma = 0.0;  // risk

  void validate() const;
};

struct OperationalOutcome {
  double completion_time = 0.0;
  double resource_cost = 0.0;
  double risk_score = 0.0;
};

/// alpha*T + beta*C + gamma*R. Negative inputs are a ContractViolation.
double cost(const OperationalOutcome& outcome, const CostWeights& weights);

/// Euclidean norm of the concatenated per-component differences. Components
/// are matched by id; mismatched sets or dimensions throw ShapeError.
double state_distance(const SystemState& current, const SystemState& target);

enum class TaskKind { Probe, Execute, Composite };
enum class TaskStatus { Pending, Running, Done, Failed };

std::string_view to_string(TaskKind k);
std::string_view to_string(TaskStatus s);

/// A (component, fault kind) pair: the unit of diagnosis and remediation.
struct FaultRef {
  ComponentId component;
  FaultKind kind;

  auto operator<=>(const FaultRef&) const = default;
};

struct Task {
  TaskId task_id;
  std::string description;
  TaskKind kind = TaskKind::Composite;
  std::set<ComponentId> target_components;
  std::vector<FaultRef> faults;
  int priority = 0;
  double resource_estimate = 0.0;
  std::set<TaskId> depends_on;
  TaskStatus status = TaskStatus::Pending;
};

/// True when depends_on edges (restricted to ids present in `tasks`) form a DAG.
bool is_acyclic(std::span<const Task> tasks);

}  // namespace aoi
