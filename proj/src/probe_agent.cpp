#include "aoi/probe_agent.hpp"

#include <algorithm>
#include <set>

#include "aoi/errors.hpp"

namespace aoi {

std::vector<Command> generate_probe_script(const Task& task, const FaultBelief& belief, const ProbeConfig& config,
                                           const CommandCatalog& catalog) {
  if (task.kind != TaskKind::Probe) throw ContractViolation("probe scripts are generated for Probe tasks only");
  if (task.target_components.empty()) throw PlanningError("probe task " + task.task_id + " has no targets");

  // Live hypotheses on the targets, restricted to the task's faults if it names any.
  std::vector<std::pair<FaultRef, double>> live;
  for (const auto& [f, p] : belief.ranked()) {
    if (p < config.hypothesis_threshold || !task.target_components.count(f.component)) continue;
    if (!task.faults.empty() && std::find(task.faults.begin(), task.faults.end(), f) == task.faults.end())
      continue;
    live.emplace_back(f, p);
  }
  if (live.empty())
    for (const auto& f : task.faults)
      if (task.target_components.count(f.component)) live.emplace_back(f, belief.probability(f));
  if (live.empty()) throw PlanningError("probe task " + task.task_id + " has nothing to probe");

  std::stable_sort(live.begin(), live.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<Command> script;
  std::set<std::string> seen;
  for (const auto& [f, p] : live) {
    if (script.size() >= config.max_commands) break;
    const auto& d = catalog.diagnostics()[catalog.diagnostic_for(f.kind)];
    std::string text = CommandCatalog::instantiate(d.command, f.component);
    if (!seen.insert(text).second) continue;
    script.push_back(parse_command(text));
  }
  return script;
}

ProbeResult ProbeAgent::run(const Task& task, const FaultBelief& belief, Environment& env,
                            MemoryStore& memory) const {
  return run_script(task.task_id, generate_probe_script(task, belief, config_, env.catalog()), env, memory);
}

ProbeResult ProbeAgent::run_script(const TaskId& task_id, const std::vector<Command>& script, Environment& env,
                                   MemoryStore& memory) const {
  const SafetyVerdict verdict = validate_script(script, PolicyKind::Probe, policy_);
  if (!verdict.safe) throw RejectedError("unsafe script rejected");
  if (!env.available()) throw TransportError("environment unavailable");

  ProbeResult result;
  result.task_id = task_id;
  for (const auto& cmd : script) {
    const StepOutcome out = env.step(cmd);
    ProbeObservation obs;
    obs.command = cmd;
    obs.outcome = out.text;
    obs.error = out.error;
    obs.target = out.component;
    if (out.role == CommandRole::Diagnostic) obs.diagnostic = env.catalog().resolve(cmd.raw_text).index;
    obs.anomaly = out.anomaly;
    result.duration += out.duration;
    result.cpu_seconds += out.cpu_seconds;

    RawContextEntry entry;
    entry.created_at = env.now();
    entry.source = Source::Probe;
    entry.text = (obs.error ? "probe error " : "probe ") + obs.target + " " + out.text;
    result.raw_entry_ids.push_back(memory.put_raw(std::move(entry)));
    result.observations.push_back(std::move(obs));
  }
  return result;
}

}  // namespace aoi
