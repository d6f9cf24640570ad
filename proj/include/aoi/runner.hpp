#pragma once

// Suite-level helpers shared by the command line tool and the bindings.

#include <filesystem>
#include <string>
#include <vector>

#include "aoi/engine.hpp"
#include "aoi/metrics.hpp"

namespace aoi {

struct LoadedSuite {
  std::vector<ScenarioSpec> scenarios;              // sorted by file name
  std::vector<std::string> errors;                  // "<file>: <reason>" for skipped files
};

/// Loads every *.json scenario in `dir` (or the single file `dir`).
LoadedSuite load_scenarios(const std::filesystem::path& dir);

/// Runs and evaluates the suite. With `concurrency` > 1 the suite also runs
/// under that many concurrent scenarios per agent pool to fill in SI.
MetricsReport run_and_aggregate(const std::vector<ScenarioSpec>& scenarios, const EngineConfig& config,
                                int workers = 1, int concurrency = 0);

/// The five configurations of the ablation table, in display order.
std::vector<EngineConfig> ablation_configs(const EngineConfig& base);

enum class SweepParam { WindowSize, Lambda, Retention };
SweepParam parse_sweep_param(std::string_view name);
std::vector<double> default_sweep_values(SweepParam p);
/// `base` with the swept parameter set; retention values are hours of raw TTL.
EngineConfig apply_sweep(const EngineConfig& base, SweepParam p, double value);
std::string sweep_label(SweepParam p, double value);

/// Writes `text` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace aoi
