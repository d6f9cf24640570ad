// Writes the bundled scenario suite and annotated log fixtures.
//
//   aoi_corpus [out_dir]   (default: data)

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "aoi/catalog.hpp"
#include "aoi/rng.hpp"
#include "aoi/simenv.hpp"

namespace fs = std::filesystem;
using namespace aoi;

namespace {

struct Shape {
  std::string name;
  Topology topology;
};

std::vector<Shape> shapes() {
  return {
      {"web", {{"lb", "web", "api", "db", "cache"}, {{"lb", "web"}, {"web", "api"}, {"api", "db"}, {"api", "cache"}}}},
      {"orders",
       {{"gateway", "orders", "payments", "queue", "ledger"},
        {{"gateway", "orders"}, {"orders", "payments"}, {"orders", "queue"}, {"payments", "ledger"}}}},
      {"auth", {{"edge", "app", "auth", "storage"}, {{"edge", "auth"}, {"edge", "app"}, {"app", "auth"}, {"app", "storage"}}}},
  };
}

std::vector<FaultKind> kinds_of(Category c) {
  std::vector<FaultKind> out;
  for (const auto& f : CommandCatalog::standard().faults())
    if (f.category == c) out.push_back(f.kind);
  return out;
}

const char* prefix(Category c) {
  switch (c) {
    case Category::ServiceFailure: return "sf";
    case Category::PerformanceDegradation: return "pd";
    case Category::ConfigurationDrift: return "cd";
    case Category::SecurityIncident: return "si";
  }
  return "x";
}

ScenarioSpec finish(ScenarioSpec s) {
  s.ground_truth_remediation = derive_ground_truth(s);
  s.critical_markers = Environment::planted_spans(s);
  s.validate();
  return s;
}

std::vector<ScenarioSpec> build_suite() {
  constexpr std::uint64_t kCorpusSeed = 20240917;
  const auto topo = shapes();
  std::vector<ScenarioSpec> out;
  int ci = 0;
  for (Category cat : kCategories) {
    const auto kinds = kinds_of(cat);
    for (int i = 0; i < 12; ++i) {
      auto rng = keyed_engine(kCorpusSeed, "scenario", static_cast<std::uint64_t>(ci), static_cast<std::uint64_t>(i));
      const Shape& shape = topo[static_cast<std::size_t>(i) % topo.size()];
      ScenarioSpec s;
      char id[32];
      std::snprintf(id, sizeof id, "%s-%02d", prefix(cat), i + 1);
      s.scenario_id = id;
      s.category = cat;
      s.topology = shape.topology;
      s.seed = rng();
      const auto& comps = shape.topology.components;
      const ComponentId first = comps[rng() % comps.size()];
      s.injected_faults.push_back({first, kinds[static_cast<std::size_t>(i) % kinds.size()],
                                   30.0 + 15.0 * static_cast<double>(i % 4)});
      if (i % 4 == 3) {
        // Second fault of the same category elsewhere, a few minutes later.
        ComponentId second = comps[rng() % comps.size()];
        if (second == first) second = comps[(std::find(comps.begin(), comps.end(), first) - comps.begin() + 1) % comps.size()];
        s.injected_faults.push_back(
            {second, kinds[static_cast<std::size_t>(i + 1) % kinds.size()], 210.0});
      }
      out.push_back(finish(std::move(s)));
    }
    ++ci;
  }
  // Cross-category cascades: a fault on a shared dependency, then one on a dependent.
  {
    ScenarioSpec s;
    s.scenario_id = "cascade-01";
    s.category = Category::ServiceFailure;
    s.topology = topo[0].topology;
    s.seed = keyed_hash(kCorpusSeed, "cascade", 1);
    s.injected_faults = {{"db", "db-conn-exhausted", 30.0}, {"web", "cpu-saturation", 180.0}};
    out.push_back(finish(std::move(s)));
  }
  {
    ScenarioSpec s;
    s.scenario_id = "cascade-02";
    s.category = Category::SecurityIncident;
    s.topology = topo[2].topology;
    s.seed = keyed_hash(kCorpusSeed, "cascade", 2);
    s.injected_faults = {{"auth", "cert-expired", 45.0}, {"app", "runtime-misconfig", 240.0}};
    out.push_back(finish(std::move(s)));
  }
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// Twenty simulated minutes of logs from an untreated incident.
std::string fixture_log(const ScenarioSpec& s) {
  Environment env(s, 7);
  std::string text;
  for (int i = 0; i < 80; ++i) {
    env.advance_clock(15.0);
    for (const auto& line : env.take_logs()) text += line.render() + "\n";
  }
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2 || (argc == 2 && argv[1][0] == '-')) {
    std::cerr << "usage: aoi_corpus [output-dir]\n";
    return 2;
  }
  const fs::path root = argc > 1 ? argv[1] : "data";
  try {
    fs::create_directories(root / "scenarios");
    fs::create_directories(root / "logs");
    const auto suite = build_suite();
    for (const auto& s : suite) write_file(root / "scenarios" / (s.scenario_id + ".json"), s.to_json_text());

    ScenarioSpec null_case;
    null_case.scenario_id = "null";
    null_case.topology = shapes()[0].topology;
    null_case.seed = 1;
    write_file(root / "null_scenario.json", finish(null_case).to_json_text());

    int fixtures = 0;
    for (std::size_t i = 0; i < suite.size(); i += 4) {
      write_file(root / "logs" / (suite[i].scenario_id + ".log"), fixture_log(suite[i]));
      ++fixtures;
    }
    std::cout << "wrote " << suite.size() << " scenarios and " << fixtures << " log fixtures to " << root << "\n";
  } catch (const std::exception& e) {
    std::cerr << "aoi_corpus: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
