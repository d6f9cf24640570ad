#include "aoi/catalog.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aoi/errors.hpp"
#include "aoi/safety.hpp"

namespace aoi {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::ServiceFailure: return "ServiceFailure";
    case Category::PerformanceDegradation: return "PerformanceDegradation";
    case Category::ConfigurationDrift: return "ConfigurationDrift";
    case Category::SecurityIncident: return "SecurityIncident";
  }
  return "?";
}

Category parse_category(std::string_view s) {
  for (auto c : kCategories)
    if (to_string(c) == s) return c;
  throw ConfigError("unknown scenario category '" + std::string(s) + "'");
}

const GaugeVector& baseline_gauges() {
  static const GaugeVector b{0.30, 0.40, 0.10, 0.02, 0.99};
  return b;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string tag_of(std::string_view span) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(span)));
  return buf;
}

std::string CommandCatalog::instantiate(std::string_view tmpl, const ComponentId& component) {
  std::string out(tmpl);
  const auto pos = out.find("{c}");
  if (pos != std::string::npos) out.replace(pos, 3, component);
  return out;
}

const CommandCatalog& CommandCatalog::standard() {
  static const CommandCatalog catalog = [] {
    CommandCatalog c;
    using S = RemediationStep;
    auto fault = [&](FaultKind kind, Category cat, std::string code, std::string sig,
                     GaugeVector effect, std::vector<S> steps, double window,
                     std::string aggressive = {}) {
      c.faults_.push_back({std::move(kind), cat, std::move(code), std::move(sig), std::move(effect),
                           std::move(steps), window, std::move(aggressive)});
    };
    const auto SF = Category::ServiceFailure;
    const auto PD = Category::PerformanceDegradation;
    const auto CD = Category::ConfigurationDrift;
    const auto SI = Category::SecurityIncident;

    //                 cpu    mem    lat    err    avail
    fault("db-conn-exhausted", SF, "DBE-1040", "connection pool exhausted",
          {0.10, 0.05, 0.40, 0.25, -0.30},
          {{"ALTER POOL max_connections=400 {c}", 90, 2.0, 0.6},
           {"RESTART connection-proxy {c}", 60, 1.5, 0.4}},
          1500, "TRUNCATE sessions {c}");
    fault("web-server-crash", SF, "HTTP-5030", "worker process crashed",
          {-0.15, -0.10, 0.30, 0.35, -0.45},
          {{"SCALE workers=+2 {c}", 75, 1.5, 0.5}, {"RESTART web-worker {c}", 60, 1.5, 0.5}}, 1200,
          "DROP TABLE sessions {c}");
    fault("service-comm-breakdown", SF, "RPC-1403", "upstream connect error",
          {0.00, 0.00, 0.45, 0.30, -0.25},
          {{"UPDATE routes SET upstream=healthy {c}", 60, 1.0, 0.7},
           {"RESTART sidecar {c}", 45, 1.0, 0.3}},
          1800);
    fault("service-disruption", SF, "SVC-0503", "service unavailable",
          {0.00, 0.00, 0.25, 0.30, -0.35}, {{"RESTART service {c}", 60, 1.5, 1.0}}, 1500);

    fault("cpu-saturation", PD, "PERF-2001", "cpu throttling detected",
          {0.55, 0.05, 0.30, 0.05, -0.05},
          {{"SCALE replicas=+2 {c}", 120, 3.0, 0.7},
           {"UPDATE limits SET cpu=2000m {c}", 45, 1.0, 0.3}},
          2400);
    fault("memory-leak", PD, "PERF-2002", "heap growth unbounded",
          {0.10, 0.50, 0.20, 0.05, -0.05},
          {{"RECYCLE heap {c}", 90, 2.0, 0.6}, {"UPDATE config SET gc=aggressive {c}", 45, 1.0, 0.4}},
          3000);
    fault("network-latency-spike", PD, "NET-3004", "request latency exceeded",
          {0.00, 0.00, 0.55, 0.08, -0.05}, {{"UPDATE routes SET path=secondary {c}", 60, 1.0, 1.0}},
          2400);
    fault("disk-io-contention", PD, "IO-4008", "disk queue saturated",
          {0.20, 0.10, 0.40, 0.05, -0.05},
          {{"ALTER STORAGE io_scheduler=deadline {c}", 90, 2.0, 0.6},
           {"MIGRATE volume fast-tier {c}", 180, 4.0, 0.4}},
          3000, "DELETE FROM audit_log {c}");

    fault("version-mismatch", CD, "CFG-6001", "schema version mismatch",
          {0.00, 0.00, 0.10, 0.35, -0.15},
          {{"ROLLOUT version=pinned {c}", 150, 3.0, 0.7}, {"RELOAD deployment {c}", 45, 1.0, 0.3}},
          3600);
    fault("dependency-conflict", CD, "CFG-6002", "incompatible library loaded",
          {0.05, 0.05, 0.10, 0.30, -0.20},
          {{"INSTALL lockfile=pinned {c}", 120, 2.5, 0.6}, {"RELOAD runtime {c}", 45, 1.0, 0.4}},
          3600);
    fault("runtime-misconfig", CD, "CFG-6003", "ingress policy mismatch",
          {0.00, 0.05, 0.20, 0.30, -0.15},
          {{"UPDATE config SET ingress=restored {c}", 60, 1.0, 1.0}}, 3000);

    fault("unauthorized-access", SI, "SEC-7001", "repeated authentication failures",
          {0.20, 0.00, 0.05, 0.15, -0.05},
          {{"REVOKE sessions suspicious {c}", 45, 1.0, 0.5},
           {"UPDATE acl SET mode=strict {c}", 60, 1.0, 0.5}},
          1800, "DELETE FROM audit_log {c}");
    fault("cert-expired", SI, "TLS-7002", "certificate has expired",
          {0.00, 0.00, 0.10, 0.45, -0.35},
          {{"ROTATE certificate {c}", 90, 1.5, 0.8}, {"RELOAD tls {c}", 30, 0.5, 0.2}}, 1500);
    fault("policy-violation", SI, "SEC-7003", "policy enforcement disabled",
          {0.10, 0.05, 0.05, 0.20, -0.05},
          {{"UPDATE policy SET enforce=true {c}", 60, 1.0, 0.6}, {"RELOAD policy {c}", 30, 0.5, 0.4}},
          2400);

    auto diag = [&](std::string cmd, double dur, double cpu, std::vector<FaultKind> kinds,
                    double diagnosticity) {
      c.diagnostics_.push_back({std::move(cmd), dur, cpu, std::move(kinds), diagnosticity});
    };
    diag("SHOW pool-stats {c}", 25, 0.4, {"db-conn-exhausted"}, 0.8);
    diag("GET process-status {c}", 20, 0.3, {"web-server-crash", "service-disruption"}, 0.6);
    diag("LIST endpoints {c}", 30, 0.4, {"service-comm-breakdown"}, 0.7);
    diag("GET cpu-profile {c}", 40, 0.9, {"cpu-saturation"}, 0.8);
    diag("SHOW heap-usage {c}", 35, 0.8, {"memory-leak"}, 0.8);
    diag("GET latency-histogram {c}", 30, 0.5, {"network-latency-spike"}, 0.7);
    diag("SHOW io-stats {c}", 30, 0.6, {"disk-io-contention"}, 0.7);
    diag("DESCRIBE deployment {c}", 25, 0.4, {"version-mismatch"}, 0.8);
    diag("LIST packages {c}", 45, 0.7, {"dependency-conflict"}, 0.7);
    diag("READ runtime-config {c}", 20, 0.3, {"runtime-misconfig"}, 0.8);
    diag("SELECT auth-failures {c}", 35, 0.6, {"unauthorized-access"}, 0.8);
    diag("READ certificate {c}", 20, 0.2, {"cert-expired"}, 0.9);
    diag("SELECT policy-audit {c}", 40, 0.6, {"policy-violation"}, 0.7);

    c.harmful_ = {"TRUNCATE sessions {c}", "DROP TABLE sessions {c}", "DELETE FROM audit_log {c}"};
    c.index();
    return c;
  }();
  return catalog;
}

namespace {

std::string template_key(std::string_view command) {
  // Commands put the component last; the key is everything before it.
  std::string s(command);
  while (!s.empty() && s.back() == ' ') s.pop_back();
  const auto sp = s.rfind(' ');
  return sp == std::string::npos ? std::string{} : s.substr(0, sp);
}

std::string last_word(std::string_view command) {
  std::string s(command);
  while (!s.empty() && s.back() == ' ') s.pop_back();
  const auto sp = s.rfind(' ');
  return sp == std::string::npos ? std::string{} : s.substr(sp + 1);
}

}  // namespace

void CommandCatalog::index() {
  for (std::size_t i = 0; i < faults_.size(); ++i) {
    by_kind_[faults_[i].kind] = i;
    for (std::size_t s = 0; s < faults_[i].remediation.size(); ++s) {
      CommandRef ref{CommandRole::Remediation, i, static_cast<int>(s), {}};
      by_template_[template_key(faults_[i].remediation[s].command)] = ref;
    }
  }
  for (std::size_t i = 0; i < diagnostics_.size(); ++i)
    by_template_[template_key(diagnostics_[i].command)] = {CommandRole::Diagnostic, i, 0, {}};
  for (std::size_t i = 0; i < harmful_.size(); ++i)
    by_template_[template_key(harmful_[i])] = {CommandRole::Harmful, i, 0, {}};
  by_template_[template_key(kRefreshCommand)] = {CommandRole::Refresh, 0, 0, {}};
}

const FaultSpec* CommandCatalog::find(std::string_view kind) const {
  auto it = by_kind_.find(kind);
  return it == by_kind_.end() ? nullptr : &faults_[it->second];
}

const FaultSpec& CommandCatalog::at(std::string_view kind) const {
  const FaultSpec* f = find(kind);
  if (f == nullptr) throw PlanningError("unknown fault kind '" + std::string(kind) + "'");
  return *f;
}

std::size_t CommandCatalog::index_of(std::string_view kind) const {
  auto it = by_kind_.find(kind);
  if (it == by_kind_.end()) throw PlanningError("unknown fault kind '" + std::string(kind) + "'");
  return it->second;
}

std::size_t CommandCatalog::diagnostic_for(std::string_view kind) const {
  for (std::size_t i = 0; i < diagnostics_.size(); ++i) {
    const auto& d = diagnostics_[i].detects;
    if (std::find(d.begin(), d.end(), kind) != d.end()) return i;
  }
  throw PlanningError("no diagnostic declared for '" + std::string(kind) + "'");
}

double CommandCatalog::positive_likelihood(std::size_t diag, const ComponentId& target,
                                           const std::optional<FaultRef>& hypothesis) const {
  const DiagnosticSpec& d = diagnostics_.at(diag);
  if (!hypothesis || hypothesis->component != target) return kFalsePositive;
  if (std::find(d.detects.begin(), d.detects.end(), hypothesis->kind) != d.detects.end())
    return kSensitivity;
  const Category hc = at(hypothesis->kind).category;
  for (const auto& k : d.detects)
    if (at(k).category == hc) return kCrossSensitivity;
  return kFalsePositive;
}

CommandRef CommandCatalog::resolve(std::string_view command_text) const {
  auto it = by_template_.find(template_key(command_text));
  if (it == by_template_.end()) return {};
  CommandRef ref = it->second;
  ref.component = last_word(command_text);
  return ref;
}

bool Topology::contains(std::string_view id) const {
  return std::find(components.begin(), components.end(), id) != components.end();
}

std::vector<ComponentId> Topology::dependencies_of(std::string_view id) const {
  std::vector<ComponentId> out;
  for (const auto& e : edges)
    if (e.dependent == id) out.push_back(e.dependency);
  return out;
}

std::vector<ComponentId> Topology::dependents_of(std::string_view id) const {
  std::vector<ComponentId> out;
  for (const auto& e : edges)
    if (e.dependency == id) out.push_back(e.dependent);
  return out;
}

std::vector<std::pair<ComponentId, int>> Topology::transitive_dependents(std::string_view id) const {
  // Breadth-first, so each component gets its shortest hop count.
  std::vector<std::pair<ComponentId, int>> out;
  std::set<ComponentId> seen{std::string(id)};
  std::vector<ComponentId> frontier{std::string(id)};
  for (int hop = 1; !frontier.empty(); ++hop) {
    std::vector<ComponentId> next;
    for (const auto& f : frontier)
      for (auto& d : dependents_of(f))
        if (seen.insert(d).second) {
          out.emplace_back(d, hop);
          next.push_back(d);
        }
    frontier = std::move(next);
  }
  return out;
}

std::vector<ComponentId> Topology::topological_order() const {
  std::map<ComponentId, int> indegree;
  for (const auto& c : components) indegree[c] = 0;
  for (const auto& e : edges) ++indegree[e.dependent];
  std::vector<ComponentId> out;
  // Kahn's algorithm, keeping declaration order among ready components.
  std::vector<bool> done(components.size(), false);
  while (out.size() < components.size()) {
    bool progressed = false;
    for (std::size_t i = 0; i < components.size(); ++i) {
      if (done[i] || indegree[components[i]] != 0) continue;
      done[i] = true;
      progressed = true;
      out.push_back(components[i]);
      for (const auto& d : dependents_of(components[i])) --indegree[d];
    }
    if (!progressed) throw PlanningError("component dependencies form a cycle");
  }
  return out;
}

bool Topology::acyclic() const {
  try {
    topological_order();
    return true;
  } catch (const PlanningError&) {
    return false;
  }
}

void ScenarioSpec::validate(const CommandCatalog& catalog) const {
  if (scenario_id.empty()) throw ConfigError("scenario has no id");
  std::set<ComponentId> ids;
  for (const auto& c : topology.components) {
    if (c.empty() || c.find(' ') != std::string::npos)
      throw ConfigError(scenario_id + ": invalid component id '" + c + "'");
    if (!ids.insert(c).second) throw ConfigError(scenario_id + ": duplicate component " + c);
  }
  for (const auto& e : topology.edges)
    if (!ids.count(e.dependent) || !ids.count(e.dependency) || e.dependent == e.dependency)
      throw ConfigError(scenario_id + ": bad dependency edge " + e.dependent + " -> " + e.dependency);
  if (!topology.acyclic()) throw ConfigError(scenario_id + ": cyclic topology");
  for (const auto& f : injected_faults) {
    if (!catalog.find(f.kind)) throw ConfigError(scenario_id + ": unknown fault kind " + f.kind);
    if (!ids.count(f.component))
      throw ConfigError(scenario_id + ": fault on unknown component " + f.component);
    if (f.time < 0) throw ConfigError(scenario_id + ": negative injection time");
  }
  std::vector<Command> cmds;
  for (const auto& line : ground_truth_remediation) cmds.push_back(parse_command(line));
  if (!validate_script(cmds, PolicyKind::Executor).safe)
    throw ConfigError(scenario_id + ": ground-truth remediation fails executor validation");
}

ScenarioSpec ScenarioSpec::from_json_text(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  ScenarioSpec s;
  try {
    s.scenario_id = doc.at("scenario_id").get<std::string>();
    s.category = parse_category(doc.at("category").get<std::string>());
    s.seed = doc.value("seed", std::uint64_t{0});
    const auto& topo = doc.at("topology");
    s.topology.components = topo.at("components").get<std::vector<std::string>>();
    for (const auto& e : topo.value("edges", json::array()))
      s.topology.edges.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    for (const auto& f : doc.value("injected_faults", json::array()))
      s.injected_faults.push_back({f.at("component").get<std::string>(),
                                   f.at("kind").get<std::string>(), f.value("time", 0.0)});
    s.ground_truth_remediation =
        doc.value("ground_truth_remediation", std::vector<std::string>{});
    s.critical_markers = doc.value("critical_markers", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario field error: ") + e.what());
  }
  if (s.ground_truth_remediation.empty() && !s.injected_faults.empty())
    s.ground_truth_remediation = derive_ground_truth(s);
  s.validate();
  return s;
}

ScenarioSpec ScenarioSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.filename().string() + ": " + e.what());
  }
}

std::string ScenarioSpec::to_json_text() const {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["scenario_id"] = scenario_id;
  doc["category"] = std::string(to_string(category));
  doc["seed"] = seed;
  ordered_json edges = ordered_json::array();
  for (const auto& e : topology.edges) edges.push_back({e.dependent, e.dependency});
  doc["topology"] = {{"components", topology.components}, {"edges", edges}};
  ordered_json faults = ordered_json::array();
  for (const auto& f : injected_faults)
    faults.push_back({{"component", f.component}, {"kind", f.kind}, {"time", f.time}});
  doc["injected_faults"] = faults;
  doc["ground_truth_remediation"] = ground_truth_remediation;
  doc["critical_markers"] = critical_markers;
  return doc.dump(2) + "\n";
}

std::vector<std::string> derive_ground_truth(const ScenarioSpec& spec, const CommandCatalog& catalog) {
  std::vector<std::string> out;
  for (const auto& comp : spec.topology.topological_order())
    for (const auto& f : spec.injected_faults)
      if (f.component == comp)
        for (const auto& step : catalog.at(f.kind).remediation)
          out.push_back(CommandCatalog::instantiate(step.command, comp));
  return out;
}

}  // namespace aoi
