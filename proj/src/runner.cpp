#include "aoi/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "aoi/errors.hpp"

namespace aoi {

namespace fs = std::filesystem;

LoadedSuite load_scenarios(const fs::path& dir) {
  LoadedSuite out;
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_regular_file(dir, ec)) {
    files.push_back(dir);
  } else if (fs::is_directory(dir, ec)) {
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  } else {
    throw ConfigError("scenario path " + dir.string() + " does not exist");
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      out.scenarios.push_back(ScenarioSpec::load(f));
    } catch (const Error& e) {
      out.errors.push_back(f.filename().string() + ": " + e.what());
    }
  }
  return out;
}

MetricsReport run_and_aggregate(const std::vector<ScenarioSpec>& scenarios, const EngineConfig& config,
                                int workers, int concurrency) {
  if (scenarios.empty()) throw ConfigError("no scenarios to run");
  std::map<std::string, const ScenarioSpec*> by_id;
  for (const auto& s : scenarios) by_id[s.scenario_id] = &s;
  auto evaluate = [&](const std::vector<RunTrace>& traces) {
    std::vector<RunRecord> records;
    records.reserve(traces.size());
    for (const auto& t : traces) records.push_back(evaluate_run(t, *by_id.at(t.scenario_id)));
    return records;
  };
  const auto records = evaluate(run_suite(scenarios, config, 1, workers));
  std::optional<ScalingProfile> scaling;
  if (concurrency > 1) {
    ScalingProfile p;
    p.concurrency = concurrency;
    p.single = records;
    p.concurrent = evaluate(run_suite(scenarios, config, concurrency, workers));
    scaling = std::move(p);
  }
  return aggregate(records, scaling, config.label());
}

std::vector<EngineConfig> ablation_configs(const EngineConfig& base) {
  std::vector<EngineConfig> out(5, base);
  for (auto& c : out) c.compressor = c.dynamic_scheduling = c.layered_memory = c.multi_agent = true;
  out[1].compressor = false;
  out[2].dynamic_scheduling = false;
  out[3].layered_memory = false;
  out[4].multi_agent = false;
  return out;
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "window_size") return SweepParam::WindowSize;
  if (name == "lambda") return SweepParam::Lambda;
  if (name == "retention") return SweepParam::Retention;
  throw ConfigError("unknown sweep parameter " + std::string(name) + " (window_size, lambda, retention)");
}

std::vector<double> default_sweep_values(SweepParam p) {
  switch (p) {
    case SweepParam::WindowSize: return {256, 512, 768, 1024, 1536};
    case SweepParam::Lambda: return {0.2, 0.35, 0.5, 0.65, 0.8};
    case SweepParam::Retention: return {24, 72, 120};
  }
  return {};
}

EngineConfig apply_sweep(const EngineConfig& base, SweepParam p, double value) {
  EngineConfig c = base;
  switch (p) {
    case SweepParam::WindowSize:
      if (value < 1 || value != std::floor(value)) throw ConfigError("window size must be a positive integer");
      c.window_size = static_cast<std::size_t>(value);
      break;
    case SweepParam::Lambda: c.lambda = value; break;
    case SweepParam::Retention: c.raw_ttl = value * kHour; break;
  }
  c.validate();
  return c;
}

std::string sweep_label(SweepParam p, double value) {
  char buf[64];
  switch (p) {
    case SweepParam::WindowSize: std::snprintf(buf, sizeof buf, "w=%g", value); break;
    case SweepParam::Lambda: std::snprintf(buf, sizeof buf, "lambda=%g", value); break;
    case SweepParam::Retention: std::snprintf(buf, sizeof buf, "retention=%gh", value); break;
  }
  return buf;
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ConfigError("cannot write " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot write " + path.string());
  }
}

}  // namespace aoi
