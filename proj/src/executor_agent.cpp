#include "aoi/executor_agent.hpp"

#include <algorithm>
#include <cmath>

#include "aoi/errors.hpp"

namespace aoi {

std::string_view to_string(ExecOutcome o) {
  switch (o) {
    case ExecOutcome::Completed: return "completed";
    case ExecOutcome::RolledBack: return "rolled-back";
    case ExecOutcome::PartialFailure: return "partial-failure";
  }
  return "?";
}

ActionPlan generate_plan(const Task& task, const Topology& topology, const StalenessView& last_update, double now,
                         const ExecutorConfig& config, bool aggressive, const SafetyPolicy& policy,
                         const CommandCatalog& catalog) {
  if (task.kind != TaskKind::Execute) throw ContractViolation("plans are generated for Execute tasks only");
  ActionPlan plan;
  plan.task_id = task.task_id;

  std::vector<FaultRef> faults = task.faults;
  const auto order = topology.topological_order();
  auto rank = [&](const ComponentId& c) {
    return std::find(order.begin(), order.end(), c) - order.begin();
  };
  std::stable_sort(faults.begin(), faults.end(),
                   [&](const FaultRef& a, const FaultRef& b) { return rank(a.component) < rank(b.component); });

  for (const auto& f : faults) {
    const FaultSpec& spec = catalog.at(f.kind);
    const bool stale = config.refresh && last_update && now - last_update(f.component) > config.staleness_bound;
    if (aggressive && !spec.aggressive.empty()) {
      plan.aggressive = true;
      GaugeVector expected(spec.effect.size());
      for (std::size_t g = 0; g < expected.size(); ++g) expected[g] = -spec.effect[g];
      plan.actions.push_back({parse_command(CommandCatalog::instantiate(spec.aggressive, f.component), policy),
                              stale, f.component, expected});
      continue;
    }
    for (std::size_t s = 0; s < spec.remediation.size(); ++s) {
      const auto& step = spec.remediation[s];
      GaugeVector expected(spec.effect.size());
      for (std::size_t g = 0; g < expected.size(); ++g) expected[g] = -step.fraction * spec.effect[g];
      plan.actions.push_back({parse_command(CommandCatalog::instantiate(step.command, f.component), policy),
                              stale && s == 0, f.component, expected});
    }
  }

  std::vector<Command> cmds;
  for (const auto& a : plan.actions) cmds.push_back(a.command);
  const SafetyVerdict verdict = validate_script(cmds, PolicyKind::Executor, policy);
  if (!verdict.safe) {
    std::string msg = "plan for " + task.task_id + " rejected:";
    for (const auto& v : verdict.violations) msg += " [" + std::to_string(v.index) + "] " + v.verb + " " + v.reason;
    throw PlanningError(msg);
  }
  return plan;
}

Checkpoint ExecutorAgent::create_checkpoint(Environment& env) {
  Checkpoint cp;
  cp.checkpoint_id = "cp-" + std::to_string(++checkpoints_);
  cp.captured_at = env.now();
  cp.state_snapshot = env.snapshot();
  return cp;
}

ExecResult ExecutorAgent::execute_plan(const ActionPlan& plan, Environment& env, MemoryStore& memory) {
  ExecResult result;
  result.task_id = plan.task_id;
  if (!env.available()) throw TransportError("environment unavailable");

  std::optional<Checkpoint> cp;
  if (config_.checkpoints) {
    cp = create_checkpoint(env);
    env.advance_clock(config_.checkpoint_duration);
    result.cpu_seconds += config_.checkpoint_cpu;
  }
  auto store = [&](const std::string& text) {
    RawContextEntry e;
    e.created_at = env.now();
    e.source = Source::Executor;
    e.text = text;
    result.raw_entry_ids.push_back(memory.put_raw(std::move(e)));
  };

  bool partial = false;
  for (const auto& action : plan.actions) {
    if (action.requires_state_refresh && config_.refresh) {
      const StepOutcome r =
          env.step(parse_command(CommandCatalog::instantiate(CommandCatalog::kRefreshCommand, action.component)));
      env.advance_clock(r.duration);
      result.cpu_seconds += r.cpu_seconds;
      ++result.refreshes;
      store("refresh " + r.text);
    }
    ActionOutcome ao;
    ao.command = action.command.raw_text;
    ao.time = env.now();
    ao.distance_before = env.distance_to_target();
    const StepOutcome out = env.step(action.command);
    env.advance_clock(out.duration);
    ++result.executed;
    result.cpu_seconds += out.cpu_seconds;
    ao.distance_after = env.distance_to_target();
    ao.text = out.text;
    ao.critical = out.critical;
    if (!out.before.empty() && out.after.size() == out.before.size()) {
      ao.observed_delta.resize(out.before.size());
      for (std::size_t g = 0; g < out.before.size(); ++g) {
        ao.observed_delta[g] = out.after[g] - out.before[g];
        const double expected = g < action.expected_delta.size() ? action.expected_delta[g] : 0.0;
        if (std::abs(ao.observed_delta[g] - expected) > config_.divergence_tolerance) ao.diverged = true;
      }
    }
    ao.success = !out.error && !out.critical && !ao.diverged;
    store("exec " + action.component + " " + out.text + (ao.success ? "" : " (failed)"));
    const bool critical = out.critical || ao.diverged;
    result.action_outcomes.push_back(std::move(ao));

    if (critical) {
      if (cp) {
        env.restore(cp->state_snapshot);
        if (!same_ground_truth(env.state(), cp->state_snapshot))
          throw EngineError("rollback to " + cp->checkpoint_id + " did not restore the checkpoint");
        env.advance_clock(config_.rollback_duration);
        result.cpu_seconds += config_.rollback_cpu;
        result.outcome = ExecOutcome::RolledBack;
        result.rollback_checkpoint = cp->checkpoint_id;
        store("rollback to " + cp->checkpoint_id);
        return result;
      }
      result.outcome = ExecOutcome::PartialFailure;
      return result;
    }
    if (out.error) partial = true;
  }
  result.outcome = partial ? ExecOutcome::PartialFailure : ExecOutcome::Completed;
  return result;
}

}  // namespace aoi
