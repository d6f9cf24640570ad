#pragma once

// Deterministic simulated infrastructure. Ground truth is a SystemState whose
// gauges are derived from the baseline, each active fault's contribution and
// attenuated propagation to dependents. Logs are emitted on fixed slots.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aoi/catalog.hpp"
#include "aoi/core_model.hpp"
#include "aoi/safety.hpp"

namespace aoi {

struct LogLine {
  double time = 0.0;
  ComponentId component;
  std::string severity;  // INFO, DEBUG, WARN, ERROR
  std::string text;      // ends with '.', may embed [CRIT:<tag>] markers
  std::set<std::string> tags;

  std::string render() const;
};

/// Marker ids embedded in a text.
std::set<std::string> parse_markers(std::string_view text);

struct StepOutcome {
  std::string text;
  bool error = false;
  bool critical = false;
  double duration = 0.0;
  double cpu_seconds = 0.0;
  CommandRole role = CommandRole::Unknown;
  ComponentId component;
  std::optional<bool> anomaly;  // diagnostics only
  GaugeVector before;           // target component gauges around the step
  GaugeVector after;
};

struct EnvEvent {
  enum Kind { Read, Mutation, Snapshot, Restore } kind;
  double time;
};

struct EnvOptions {
  double slot_seconds = 15.0;
  double root_line_probability = 0.1;
  double dependent_line_probability = 0.3;
  double red_herring_probability = 0.01;
  double noise = 0.02;
  double propagation = 0.5;
  double escalation_scale = 1.0;  // multiplies every fault's escalation window
  double metric_noise = 0.0;      // std of monitoring read noise per gauge
  bool emit_logs = true;
};

class Environment {
 public:
  static constexpr double kResolvedDistance = 0.05;

  Environment(ScenarioSpec spec, std::uint64_t run_seed, EnvOptions options = {},
              const CommandCatalog& catalog = CommandCatalog::standard());

  const ScenarioSpec& spec() const { return spec_; }
  const Topology& topology() const { return spec_.topology; }
  const CommandCatalog& catalog() const { return catalog_; }
  const EnvOptions& options() const { return options_; }
  std::uint64_t seed() const { return seed_; }

  double now() const { return state_.time; }
  const SystemState& state() const { return state_; }
  /// What monitoring reports: gauges plus read noise, no fault labels. Pure.
  SystemState monitor() const;
  /// All components at baseline with no faults.
  SystemState target() const;
  double distance_to_target() const;
  bool resolved() const;
  /// A fault outlived its escalation deadline: unrecoverable outage.
  bool escalated() const { return escalated_; }
  double first_injection_time() const;

  SystemState snapshot();
  /// Ground truth becomes `snap` exactly; the clock does not move. Injections
  /// scheduled after the snapshot's time are re-armed.
  void restore(const SystemState& snap);

  /// Runs one command. Does not move the clock: the caller advances it by
  /// the returned duration.
  StepOutcome step(const Command& cmd);

  void advance_clock(double dt);
  std::vector<LogLine> take_logs();

  void set_available(bool up) { available_ = up; }
  bool available() const { return available_; }

  std::uint64_t mutation_count() const { return mutations_; }
  const std::vector<EnvEvent>& events() const { return events_; }

  /// Spans a scenario plants as critical markers, derived from its faults.
  static std::vector<std::string> planted_spans(const ScenarioSpec& spec,
                                                const CommandCatalog& catalog = CommandCatalog::standard());
  static std::string threshold_span(const FaultSpec& f);
  static std::string causal_span(const ComponentId& upstream);

 private:
  void inject(const ComponentId& c, const FaultKind& kind, double onset, bool storm);
  void recompute();
  void emit_slot(double t, std::uint64_t slot);
  void emit_storm(const ComponentId& c, const FaultSpec& f, double t);
  void emit_root_lines(const ComponentId& c, const FaultSpec& f, double t, int count);
  void push_log(double t, const ComponentId& c, std::string severity, std::string text);
  std::size_t component_index(const ComponentId& c) const;
  void check_escalation();

  ScenarioSpec spec_;
  std::uint64_t seed_;
  EnvOptions options_;
  const CommandCatalog& catalog_;
  SystemState state_;
  std::vector<bool> injected_;
  double next_slot_ = 0.0;
  std::uint64_t slot_index_ = 0;
  std::vector<LogLine> logs_;
  bool escalated_ = false;
  bool available_ = true;
  std::uint64_t mutations_ = 0;
  std::uint64_t draws_ = 0;
  std::vector<EnvEvent> events_;
};

}  // namespace aoi
