// Thin bindings: configs travel as JSON text, reports come back as JSON text.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aoi/compressor.hpp"
#include "aoi/config_io.hpp"
#include "aoi/errors.hpp"
#include "aoi/runner.hpp"
#include "aoi/safety.hpp"

namespace py = pybind11;
using namespace aoi;

namespace {

EngineConfig config_or_default(const std::string& json_text) {
  return json_text.empty() ? EngineConfig{} : config_from_json(json_text);
}

}  // namespace

PYBIND11_MODULE(_aoi, m) {
  m.doc() = "Incident remediation simulator";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("default_config", [] { return config_to_json(EngineConfig{}); },
        "Default engine configuration as JSON text.");

  m.def(
      "load_scenarios",
      [](const std::string& path) {
        const auto suite = load_scenarios(path);
        std::vector<std::string> ids;
        for (const auto& s : suite.scenarios) ids.push_back(s.scenario_id);
        return py::make_tuple(ids, suite.errors);
      },
      py::arg("path"), "Scenario ids under `path` and the files that failed to load.");

  m.def(
      "run_suite",
      [](const std::string& path, const std::string& config_json, bool ablate, int concurrency) {
        const auto suite = load_scenarios(path);
        if (suite.scenarios.empty()) throw ConfigError("no runnable scenarios in " + path);
        const EngineConfig config = config_or_default(config_json);
        config.validate();
        std::vector<MetricsReport> reports;
        {
          py::gil_scoped_release release;
          if (ablate) {
            for (const auto& c : ablation_configs(config))
              reports.push_back(run_and_aggregate(suite.scenarios, c, 1, 0));
          } else {
            reports.push_back(run_and_aggregate(suite.scenarios, config, 1, concurrency));
          }
        }
        return report_json(reports, ablate ? "ablation" : "run");
      },
      py::arg("path"), py::arg("config_json") = "", py::arg("ablate") = false, py::arg("concurrency") = 0,
      "Runs the scenarios and returns the JSON report.");

  m.def(
      "compress",
      [](const std::string& text, std::size_t window_size, double overlap_ratio, double target_ratio) {
        CompressionParams p{window_size, overlap_ratio, target_ratio, nullptr};
        ExtractiveSummarizer s;
        const auto r = compress(text, p, s);
        py::dict d;
        d["summary"] = r.summary_text;
        d["raw_tokens"] = r.raw_tokens;
        d["compressed_tokens"] = r.compressed_tokens;
        d["surviving_tags"] = r.surviving_tags;
        d["secondary_pass"] = r.secondary_pass;
        return d;
      },
      py::arg("text"), py::arg("window_size") = 768, py::arg("overlap_ratio") = 0.5, py::arg("target_ratio") = 0.72);

  m.def("ccr", &ccr, py::arg("raw_tokens"), py::arg("compressed_tokens"));
  m.def(
      "ips",
      [](const std::set<std::string>& truth, const std::set<std::string>& preserved) {
        CompressedContextEntry e;
        e.preserved_tags = preserved;
        return ips(truth, e);
      },
      py::arg("truth_tags"), py::arg("preserved_tags"));

  m.def(
      "make_windows",
      [](std::size_t n, std::size_t window_size, double overlap_ratio) {
        const std::vector<std::string> tokens(n, "x");
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& w : make_windows(tokens, window_size, overlap_ratio)) out.emplace_back(w.start, w.end);
        return out;
      },
      py::arg("n"), py::arg("window_size"), py::arg("overlap_ratio"), "(start, end) of each window over n tokens.");

  m.def(
      "validate_script",
      [](const std::string& script, bool executor) {
        const auto cmds = tokenize_script(script);
        const auto v = validate_script(cmds, executor ? PolicyKind::Executor : PolicyKind::Probe);
        std::vector<std::tuple<std::size_t, std::string, std::string>> out;
        for (const auto& x : v.violations) out.emplace_back(x.index, x.verb, x.reason);
        return py::make_tuple(v.safe, out);
      },
      py::arg("script"), py::arg("executor") = false, "(safe, [(index, verb, reason), ...]).");
}
