#pragma once

// The simulator's command catalog: fault kinds with their symptom effects,
// diagnostics with declared outcome likelihoods, remediation sequences with
// expected effects, and the harmful-command set. Also the scenario format.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aoi/core_model.hpp"

namespace aoi {

enum class Category { ServiceFailure, PerformanceDegradation, ConfigurationDrift, SecurityIncident };

inline constexpr std::array<Category, 4> kCategories = {
    Category::ServiceFailure, Category::PerformanceDegradation, Category::ConfigurationDrift,
    Category::SecurityIncident};

std::string_view to_string(Category c);
Category parse_category(std::string_view s);

using GaugeVector = std::vector<double>;

/// Healthy operating point every component returns to.
const GaugeVector& baseline_gauges();

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text);
/// Stable id of a critical span: 16 lowercase hex digits of its FNV-1a hash.
std::string tag_of(std::string_view span);

struct RemediationStep {
  std::string command;  // template; "{c}" is replaced by the component id
  double duration = 60.0;
  double cpu_seconds = 1.0;
  double fraction = 1.0;  // share of the fault's effect removed by this step
};

struct FaultSpec {
  FaultKind kind;
  Category category = Category::ServiceFailure;
  std::string error_code;
  std::string signature;    // phrase logged by the faulty component
  GaugeVector effect;       // deviation from baseline while active
  std::vector<RemediationStep> remediation;
  double escalation_window = 1800.0;  // seconds until the fault becomes an outage
  std::string aggressive;   // harmful shortcut a hurried planner may propose; may be empty
};

struct DiagnosticSpec {
  std::string command;  // template with "{c}"
  double duration = 30.0;
  double cpu_seconds = 0.5;
  std::vector<FaultKind> detects;
  double diagnosticity = 0.8;
};

enum class CommandRole { Diagnostic, Remediation, Harmful, Refresh, Unknown };

struct CommandRef {
  CommandRole role = CommandRole::Unknown;
  std::size_t index = 0;  // diagnostic index or fault index
  int stage = 0;          // remediation stage
  ComponentId component;
};

class CommandCatalog {
 public:
  static constexpr double kSensitivity = 0.9;
  static constexpr double kCrossSensitivity = 0.3;
  static constexpr double kFalsePositive = 0.05;
  static constexpr double kRefreshDuration = 10.0;
  static constexpr const char* kRefreshCommand = "GET metrics {c}";
  /// Dependents of a faulty component log this kind's signature.
  static constexpr const char* kEchoKind = "network-latency-spike";

  /// The shipped catalog: 14 kinds, at least 3 per category.
  static const CommandCatalog& standard();

  const std::vector<FaultSpec>& faults() const { return faults_; }
  const std::vector<DiagnosticSpec>& diagnostics() const { return diagnostics_; }
  const std::vector<std::string>& harmful() const { return harmful_; }

  const FaultSpec* find(std::string_view kind) const;
  const FaultSpec& at(std::string_view kind) const;  // PlanningError when unknown
  std::size_t index_of(std::string_view kind) const;

  /// Diagnostic declared for a fault kind.
  std::size_t diagnostic_for(std::string_view kind) const;

  /// Declared probability that diagnostic `diag` run on `target` reports an
  /// anomaly when the single fault `hypothesis` holds (nullopt: no fault).
  double positive_likelihood(std::size_t diag, const ComponentId& target,
                             const std::optional<FaultRef>& hypothesis) const;

  /// Resolves concrete command text back to its catalog role.
  CommandRef resolve(std::string_view command_text) const;

  static std::string instantiate(std::string_view tmpl, const ComponentId& component);

 private:
  CommandCatalog() = default;
  void index();

  std::vector<FaultSpec> faults_;
  std::vector<DiagnosticSpec> diagnostics_;
  std::vector<std::string> harmful_;
  std::map<std::string, std::size_t, std::less<>> by_kind_;
  std::map<std::string, CommandRef, std::less<>> by_template_;
};

struct Dependency {
  ComponentId dependent;
  ComponentId dependency;
  bool operator==(const Dependency&) const = default;
};

struct Topology {
  std::vector<ComponentId> components;
  std::vector<Dependency> edges;

  bool contains(std::string_view id) const;
  std::vector<ComponentId> dependencies_of(std::string_view id) const;
  std::vector<ComponentId> dependents_of(std::string_view id) const;
  /// Dependents at any distance, with hop counts.
  std::vector<std::pair<ComponentId, int>> transitive_dependents(std::string_view id) const;
  bool acyclic() const;
  /// Dependencies before dependents. PlanningError on a cycle.
  std::vector<ComponentId> topological_order() const;
};

struct InjectedFault {
  ComponentId component;
  FaultKind kind;
  double time = 0.0;
};

struct ScenarioSpec {
  std::string scenario_id;
  Category category = Category::ServiceFailure;
  Topology topology;
  std::vector<InjectedFault> injected_faults;
  std::vector<std::string> ground_truth_remediation;
  std::vector<std::string> critical_markers;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a kind is unknown, a component is missing, the
  /// topology has a cycle, or the ground-truth remediation is not executable.
  void validate(const CommandCatalog& catalog = CommandCatalog::standard()) const;

  static ScenarioSpec from_json_text(std::string_view text);
  static ScenarioSpec load(const std::filesystem::path& path);
  std::string to_json_text() const;
};

/// Catalog remediation of every injected fault, dependencies first.
std::vector<std::string> derive_ground_truth(const ScenarioSpec& spec,
                                             const CommandCatalog& catalog = CommandCatalog::standard());

}  // namespace aoi
