#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "aoi/catalog.hpp"
#include "aoi/core_model.hpp"

namespace testutil {

inline std::filesystem::path data_dir() { return AOI_TEST_DATA; }

inline aoi::ComponentState component(const std::string& id, std::vector<double> v) {
  aoi::ComponentState c;
  c.component_id = id;
  c.state_vector = std::move(v);
  return c;
}

/// Three components: api depends on db, web depends on api.
inline aoi::ScenarioSpec chain_scenario(std::vector<aoi::InjectedFault> faults, const std::string& id = "t") {
  aoi::ScenarioSpec s;
  s.scenario_id = id;
  s.topology.components = {"web", "api", "db"};
  s.topology.edges = {{"web", "api"}, {"api", "db"}};
  s.injected_faults = std::move(faults);
  s.ground_truth_remediation = aoi::derive_ground_truth(s);
  s.seed = 11;
  return s;
}

}  // namespace testutil
