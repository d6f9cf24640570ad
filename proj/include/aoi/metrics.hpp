#pragma once

// Per-run metrics from traces and their mean/std aggregation into reports.

#include <optional>
#include <string>
#include <vector>

#include "aoi/catalog.hpp"
#include "aoi/core_model.hpp"
#include "aoi/engine.hpp"

namespace aoi {

struct RunRecord {
  std::string scenario_id;
  std::uint64_t seed = 0;
  bool success = false;
  double mttr_minutes = 0.0;
  std::optional<double> ccr;  // absent without compression events
  std::optional<double> ips;  // absent without events that carried tags
  std::size_t mutating_actions = 0;
  std::size_t incorrect_actions = 0;
  double fpr = 0.0;
  std::size_t tasks_completed = 0;
  double cpu_seconds = 0.0;
  double rue_cpu_seconds = 0.0;  // per completed task
  std::size_t harmful_proposed = 0;
  std::size_t harmful_executed = 0;
  double sss = 1.0;
  double risk = 0.0;  // harmful share of executed mutating actions
  double cost = 0.0;
};

/// Throws ContractViolation when the trace is incomplete.
RunRecord evaluate_run(const RunTrace& trace, const ScenarioSpec& truth, const CostWeights& weights = {});

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t n = 0;
};

Stat summarize(const std::vector<double>& values);

struct ScalingProfile {
  int concurrency = 20;
  std::vector<RunRecord> single;      // runs at concurrency 1
  std::vector<RunRecord> concurrent;  // runs at `concurrency`
};

struct MetricsReport {
  std::string label;
  Stat tsr;
  Stat mttr;
  std::optional<Stat> ccr;
  std::optional<Stat> ips;
  Stat fpr;
  Stat rue_cpu_seconds;
  Stat rue_normalized;  // 1 / (1 + rue/100)
  std::optional<Stat> si;
  Stat sss;
  Stat risk;
  std::vector<RunRecord> runs;
};

/// Throws ContractViolation on empty input.
MetricsReport aggregate(const std::vector<RunRecord>& records,
                        const std::optional<ScalingProfile>& scaling = std::nullopt, std::string label = "full");

/// TSR ratio at the profile's concurrency over concurrency 1, capped to [0, 1].
double scaling_index(const ScalingProfile& profile);

/// JSON document with every report and its per-run records. No timestamps.
std::string report_json(const std::vector<MetricsReport>& reports, const std::string& title = "run");
/// Aligned plain-text table, one row per report.
std::string report_table(const std::vector<MetricsReport>& reports);

}  // namespace aoi
