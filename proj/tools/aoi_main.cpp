// Command line driver: run a scenario suite, the ablation table or a
// parameter sweep and write a JSON report plus a plain-text table.

#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "aoi/config_io.hpp"
#include "aoi/errors.hpp"
#include "aoi/runner.hpp"

namespace fs = std::filesystem;
using namespace aoi;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("not a number: " + item);
    }
    if (used != item.size()) throw ConfigError("not a number: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

fs::path table_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".txt");
  if (p == out) p += ".txt";
  return p;
}

void check_writable(const fs::path& out) {
  const fs::path probe = out.string() + ".probe";
  std::ofstream f(probe);
  if (!f) throw ConfigError("output path " + out.string() + " is not writable");
  f.close();
  fs::remove(probe);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent incident remediation simulator"};
  std::string scenarios = "data/scenarios";
  std::string seeds_text;
  std::string config_path;
  std::string out = "report.json";
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool ablate = false;
  std::string sweep;
  std::string values_text;
  std::string summarizer;
  int step_budget = 0;
  int concurrency = 20;

  app.add_option("--scenarios", scenarios, "Scenario directory or file");
  app.add_option("--seeds", seeds_text, "Comma-separated run seeds");
  app.add_option("--config", config_path, "Engine configuration (JSON)");
  app.add_option("--out", out, "Report path (JSON); the table goes next to it as .txt");
  app.add_option("--workers", workers, "Host threads")->check(CLI::PositiveNumber);
  app.add_flag("--ablate", ablate, "Run the five ablation configurations");
  app.add_option("--sweep", sweep, "Sweep window_size, lambda or retention");
  app.add_option("--values", values_text, "Comma-separated sweep values");
  app.add_option("--summarizer", summarizer, "extractive or remote");
  app.add_option("--step-budget", step_budget, "Cycle budget per run");
  app.add_option("--concurrency", concurrency, "Concurrent scenarios for the scaling index (0: skip)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  EngineConfig config;
  std::vector<double> values;
  std::optional<SweepParam> param;
  LoadedSuite suite;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    if (!seeds_text.empty()) {
      config.seeds.clear();
      for (double v : parse_list(seeds_text)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v)))
          throw ConfigError("seeds must be non-negative integers");
        config.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    }
    if (!summarizer.empty()) config.summarizer = summarizer;
    if (step_budget != 0) config.step_budget = step_budget;
    config.validate();
    if (ablate && !sweep.empty()) throw ConfigError("--ablate and --sweep are exclusive");
    if (!sweep.empty()) {
      param = parse_sweep_param(sweep);
      values = values_text.empty() ? default_sweep_values(*param) : parse_list(values_text);
      for (double v : values) apply_sweep(config, *param, v);
    } else if (!values_text.empty()) {
      throw ConfigError("--values needs --sweep");
    }
    if (concurrency < 0) throw ConfigError("--concurrency must be non-negative");
    suite = load_scenarios(scenarios);
  } catch (const Error& e) {
    std::cerr << "aoi: " << e.what() << "\n";
    return 2;
  }
  for (const auto& err : suite.errors) std::cerr << "aoi: skipped " << err << "\n";
  if (suite.scenarios.empty()) {
    std::cerr << "aoi: no runnable scenarios in " << scenarios << "\n";
    return 1;
  }
  try {
    check_writable(out);
  } catch (const Error& e) {
    std::cerr << "aoi: " << e.what() << "\n";
    return 1;
  }

  std::vector<MetricsReport> reports;
  std::string title = "run";
  try {
    if (ablate) {
      title = "ablation";
      for (const auto& c : ablation_configs(config))
        reports.push_back(run_and_aggregate(suite.scenarios, c, workers, 0));
    } else if (param) {
      title = "sweep " + sweep;
      for (double v : values) {
        auto r = run_and_aggregate(suite.scenarios, apply_sweep(config, *param, v), workers, 0);
        r.label = sweep_label(*param, v);
        reports.push_back(std::move(r));
      }
    } else {
      reports.push_back(run_and_aggregate(suite.scenarios, config, workers, concurrency));
    }
  } catch (const Error& e) {
    std::cerr << "aoi: " << e.what() << "\n";
    return 1;
  }

  const std::string table = report_table(reports);
  try {
    write_atomic(out, report_json(reports, title));
    write_atomic(table_path(out), table);
  } catch (const Error& e) {
    std::cerr << "aoi: " << e.what() << "\n";
    return 1;
  }
  std::cout << table;
  return suite.errors.empty() ? 0 : 1;
}
