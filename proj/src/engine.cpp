#include "aoi/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "aoi/errors.hpp"
#include "aoi/llm_adapter.hpp"
#include "aoi/rng.hpp"

namespace aoi {

namespace {

constexpr double kContextCpuPerToken = 0.002;
constexpr double kCompressionCpuPerToken = 0.0005;

MemoryConfig memory_config(const EngineConfig& c) {
  MemoryConfig m;
  m.raw_ttl = c.raw_ttl;
  m.compressed_ttl = c.compressed_ttl;
  m.flat = !c.layered_memory;
  return m;
}

ObserverConfig observer_config(const EngineConfig& c) {
  ObserverConfig o = c.observer;
  o.lambda = c.lambda;
  o.decompose.theta_complex = c.theta_complex;
  return o;
}

ExecutorConfig executor_config(const EngineConfig& c) {
  ExecutorConfig e = c.executor;
  if (!c.multi_agent) {
    e.checkpoints = false;
    e.refresh = false;
  }
  return e;
}

// A lone generalist agent has no compressor specialist and no executor
// safeguards.
EngineConfig checked(const EngineConfig& c) {
  c.validate();
  EngineConfig out = c;
  if (!out.multi_agent) out.compressor = false;
  return out;
}

}  // namespace

void EngineConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid configuration: " + what);
  };
  need(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  need(theta_complex > 0.0, "theta_complex must be positive");
  need(raw_ttl > 0.0 && compressed_ttl > 0.0, "ttls must be positive");
  need(summarizer == "extractive" || summarizer == "remote", "summarizer must be extractive or remote");
  need(step_budget >= 1, "step_budget must be at least 1");
  need(!seeds.empty(), "seeds must not be empty");
  need(pools.probe >= 1 && pools.executor >= 1 && pools.compressor >= 1, "agent pools need at least one slot");
  need(compression_seconds >= 0.0 && idle_seconds > 0.0 && decision_cpu >= 0.0 && read_seconds_per_token >= 0.0,
       "timing values out of range");
  need(observer.symptom_sigma > 0.0, "symptom_sigma must be positive");
  need(observer.no_fault_prior > 0.0 && observer.no_fault_prior < 1.0, "no_fault_prior must lie in (0, 1)");
  need(observer.context_capacity >= 1, "context_capacity must be positive");
  need(executor.divergence_tolerance > 0.0, "divergence_tolerance must be positive");
  need(executor.staleness_bound >= 0.0, "staleness_bound must be non-negative");
  need(probe.max_commands >= 1, "probe max_commands must be positive");
  need(env.escalation_scale > 0.0, "escalation_scale must be positive");
  need(remote.max_retries >= 0 && remote.max_in_flight >= 1 && remote.timeout_seconds > 0.0,
       "remote summarizer settings out of range");
  CompressionParams p{window_size, overlap_ratio, target_ratio, nullptr};
  try {
    p.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

std::string EngineConfig::label() const {
  const int off = !compressor + !dynamic_scheduling + !layered_memory + !multi_agent;
  if (off == 0) return "full";
  if (off == 1) {
    if (!compressor) return "w/o compressor";
    if (!dynamic_scheduling) return "w/o dynamic scheduling";
    if (!layered_memory) return "w/o three-layer memory";
    return "single agent";
  }
  std::string s;
  if (!compressor) s += "-compressor";
  if (!dynamic_scheduling) s += "-scheduling";
  if (!layered_memory) s += "-memory";
  if (!multi_agent) s += "-multi";
  return s.substr(1);
}

std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::Ingest: return "ingest";
    case EventType::Decision: return "decision";
    case EventType::Probe: return "probe";
    case EventType::Execute: return "execute";
    case EventType::Rollback: return "rollback";
    case EventType::HarmfulProposed: return "harmful-proposed";
    case EventType::HarmfulBlocked: return "harmful-blocked";
    case EventType::Idle: return "idle";
    case EventType::Resolved: return "resolved";
    case EventType::Escalated: return "escalated";
    case EventType::Budget: return "budget";
  }
  return "?";
}

AgentPools::AgentPools(PoolSizes sizes)
    : probe_(static_cast<std::size_t>(std::max(1, sizes.probe)), 0.0),
      executor_(static_cast<std::size_t>(std::max(1, sizes.executor)), 0.0),
      compressor_(static_cast<std::size_t>(std::max(1, sizes.compressor)), 0.0) {}

std::vector<double>& AgentPools::slots(Kind kind) {
  switch (kind) {
    case Kind::Probe: return probe_;
    case Kind::Executor: return executor_;
    case Kind::Compressor: return compressor_;
  }
  return probe_;
}

AgentPools::Slot AgentPools::acquire(Kind kind, double request_time) {
  auto& s = slots(kind);
  const auto it = std::min_element(s.begin(), s.end());
  const auto index = static_cast<std::size_t>(it - s.begin());
  const double start = std::max(request_time, *it);
  s[index] = start;
  return {kind, index, start};
}

void AgentPools::release(const Slot& slot, double end_time) {
  auto& s = slots(slot.kind);
  s.at(slot.index) = std::max(s[slot.index], end_time);
}

std::unique_ptr<Summarizer> make_summarizer(const EngineConfig& config) {
  if (config.summarizer == "remote") {
    RemoteSummarizerConfig rc;
    rc.endpoint = config.remote.endpoint;
    rc.model = config.remote.model;
    rc.token_env = config.remote.token_env;
    rc.timeout_seconds = config.remote.timeout_seconds;
    rc.max_retries = config.remote.max_retries;
    rc.max_in_flight = config.remote.max_in_flight;
    return std::make_unique<RemoteSummarizer>(rc);
  }
  return std::make_unique<ExtractiveSummarizer>();
}

std::uint64_t run_seed(const ScenarioSpec& spec, std::uint64_t suite_seed) {
  return keyed_hash(spec.seed, "run", suite_seed, fnv1a64(spec.scenario_id));
}

Engine::Engine(const ScenarioSpec& spec, std::uint64_t seed, const EngineConfig& config)
    : config_(checked(config)),
      env_(spec, run_seed(spec, seed), config.env),
      memory_(memory_config(config)),
      observer_(spec.topology, observer_config(config)),
      probe_agent_(config.probe),
      executor_agent_(executor_config(config)),
      summarizer_(config_.compressor ? make_summarizer(config) : nullptr),
      compression_{config.window_size, config.overlap_ratio, config.target_ratio, nullptr} {
  trace_.scenario_id = spec.scenario_id;
  trace_.seed = seed;
  trace_.start_time = env_.first_injection_time();
}

void Engine::event(EventType t, std::string detail) {
  trace_.events.push_back({env_.now(), t, std::move(detail)});
}

void Engine::finish() {
  trace_.end_time = env_.now();
  trace_.final_state = env_.state();
  trace_.complete = true;
}

bool Engine::check_termination() {
  if (env_.resolved()) {
    trace_.resolved = true;
    event(EventType::Resolved, "");
  } else if (env_.escalated()) {
    trace_.escalated = true;
    event(EventType::Escalated, "");
  } else if (trace_.cycles >= static_cast<std::size_t>(config_.step_budget)) {
    event(EventType::Budget, std::to_string(trace_.cycles) + " cycles");
  } else {
    return false;
  }
  finish();
  return true;
}

void Engine::ingest(AgentPools& pools) {
  std::vector<LogLine> lines = env_.take_logs();
  if (lines.empty()) return;
  std::map<ComponentId, RawContextEntry> by_component;
  for (const auto& line : lines) {
    RawContextEntry& e = by_component[line.component];
    if (!e.text.empty()) e.text += ' ';
    e.text += line.render();
    e.critical_tags.insert(line.tags.begin(), line.tags.end());
  }
  std::vector<std::pair<std::string, RawContextEntry>> stored;
  for (auto& [c, e] : by_component) {
    e.created_at = env_.now();
    e.source = Source::Environment;
    std::string id = memory_.put_raw(e);
    stored.emplace_back(std::move(id), std::move(e));
  }
  event(EventType::Ingest, std::to_string(lines.size()) + " lines");
  if (!config_.compressor) return;

  const auto slot = pools.acquire(AgentPools::Kind::Compressor, env_.now());
  env_.advance_clock(slot.start - env_.now());
  for (const auto& [id, e] : stored) {
    const CompressionResult r = compress(e.text, compression_, *summarizer_);
    CompressedContextEntry cmp = make_compressed_entry(r, {id}, e.critical_tags, env_.now());
    CompressionEvent ce;
    ce.time = env_.now();
    ce.raw_tokens = r.raw_tokens;
    ce.compressed_tokens = r.compressed_tokens;
    ce.truth_tags = e.critical_tags;
    ce.preserved_tags = cmp.preserved_tags;
    memory_.put_compressed(std::move(cmp));
    trace_.compressions.push_back(std::move(ce));
    trace_.cpu_seconds += kCompressionCpuPerToken * static_cast<double>(r.raw_tokens);
  }
  env_.advance_clock(config_.compression_seconds);
  pools.release(slot, env_.now());
}

void Engine::run_probe_task(const Task& task, AgentPools& pools) {
  const auto slot = pools.acquire(AgentPools::Kind::Probe, env_.now());
  env_.advance_clock(slot.start - env_.now());
  ProbeResult r;
  try {
    r = probe_agent_.run(task, observer_.belief(), env_, memory_);
  } catch (const PlanningError& e) {
    pools.release(slot, env_.now());
    memory_.complete_task(task.task_id, TaskStatus::Failed);
    event(EventType::Probe, task.task_id + " failed: " + e.what());
    return;
  }
  env_.advance_clock(r.duration);
  for (const auto& obs : r.observations)
    if (obs.diagnostic && obs.anomaly)
      r.information_gain += observer_.apply_diagnostic(*obs.diagnostic, obs.target, *obs.anomaly, env_.now());
  pools.release(slot, env_.now());
  memory_.complete_task(task.task_id, TaskStatus::Done);
  trace_.cpu_seconds += r.cpu_seconds;
  ++trace_.probes;
  ++trace_.tasks_completed;
  event(EventType::Probe, task.task_id + " gain=" + std::to_string(r.information_gain));
}

void Engine::run_execute_task(const Task& task, AgentPools& pools) {
  const auto slot = pools.acquire(AgentPools::Kind::Executor, env_.now());
  env_.advance_clock(slot.start - env_.now());
  const FaultRef fault = task.faults.front();
  const FaultSpec& spec = env_.catalog().at(fault.kind);
  const StalenessView staleness = [this](const ComponentId& c) { return observer_.last_update(c); };

  const bool try_aggressive = !aggressive_failed_ && !spec.aggressive.empty() &&
                              env_.now() - trace_.start_time > config_.aggressive_after;
  ActionPlan plan;
  bool have_plan = false;
  if (try_aggressive) {
    ++trace_.harmful_proposed;
    event(EventType::HarmfulProposed, CommandCatalog::instantiate(spec.aggressive, fault.component));
    try {
      plan = generate_plan(task, env_.topology(), staleness, env_.now(), executor_agent_.config(), true);
      have_plan = true;
    } catch (const PlanningError& e) {
      aggressive_failed_ = true;
      event(EventType::HarmfulBlocked, e.what());
    }
  }
  try {
    if (!have_plan) plan = generate_plan(task, env_.topology(), staleness, env_.now(), executor_agent_.config());
  } catch (const PlanningError& e) {
    pools.release(slot, env_.now());
    memory_.complete_task(task.task_id, TaskStatus::Failed);
    event(EventType::Execute, task.task_id + " failed: " + e.what());
    return;
  }

  const ExecResult r = executor_agent_.execute_plan(plan, env_, memory_);
  pools.release(slot, env_.now());
  trace_.cpu_seconds += r.cpu_seconds;
  ++trace_.executes;
  for (const auto& ao : r.action_outcomes)
    trace_.mutations.push_back({ao.time, ao.command, ao.distance_before, ao.distance_after, plan.aggressive});
  if (plan.aggressive && !r.action_outcomes.empty()) ++trace_.harmful_executed;
  for (const auto& c : task.target_components) observer_.touch(c, env_.now());

  switch (r.outcome) {
    case ExecOutcome::Completed:
      memory_.complete_task(task.task_id, TaskStatus::Done);
      ++trace_.tasks_completed;
      observer_.report_fix();
      break;
    case ExecOutcome::RolledBack:
      ++trace_.rollbacks;
      event(EventType::Rollback, *r.rollback_checkpoint);
      [[fallthrough]];
    case ExecOutcome::PartialFailure:
      memory_.complete_task(task.task_id, TaskStatus::Failed);
      if (plan.aggressive) aggressive_failed_ = true;
      observer_.apply_failed_remediation(fault);
      break;
  }
  event(EventType::Execute, task.task_id + " " + std::string(to_string(r.outcome)));
}

void Engine::single_agent_cycle(AgentPools& pools) {
  auto ready_to_execute = [&]() -> std::optional<FaultRef> {
    const auto ranked = observer_.belief().ranked();
    if (ranked.empty()) return std::nullopt;
    const auto& [top, p] = ranked.front();
    if (observer_.symptomatic().empty()) return std::nullopt;
    if (p >= config_.observer.decompose.execute_threshold && p >= observer_.belief().no_fault()) return top;
    return std::nullopt;
  };

  std::optional<FaultRef> target = ready_to_execute();
  if (!target) {
    Task root = observer_.root_task();
    if (root.faults.empty()) return;
    root.kind = TaskKind::Probe;
    root.task_id = "probe-" + std::to_string(++task_serial_);
    memory_.enqueue_task(root);
    const auto t = memory_.dequeue_task(TaskKind::Probe);
    event(EventType::Decision, "probe " + t->task_id);
    run_probe_task(*t, pools);
    target = ready_to_execute();
    if (!target) return;
  }
  Task exec;
  exec.task_id = "exec-" + std::to_string(++task_serial_);
  exec.kind = TaskKind::Execute;
  exec.target_components = {target->component};
  exec.faults = {*target};
  memory_.enqueue_task(exec);
  const auto t = memory_.dequeue_task(TaskKind::Execute);
  event(EventType::Decision, "execute " + t->task_id);
  run_execute_task(*t, pools);
}

void Engine::step(AgentPools& pools) {
  if (trace_.complete) return;
  if (check_termination()) return;
  ++trace_.cycles;
  trace_.cpu_seconds += config_.decision_cpu;

  memory_.expire(env_.now());
  ingest(pools);
  observer_.observe(env_.monitor(), env_.now());
  const Layer layer = config_.compressor ? Layer::Compressed : Layer::Raw;
  const std::size_t read = observer_.read_context(memory_, layer, env_.now());
  trace_.cpu_seconds += kContextCpuPerToken * static_cast<double>(read);
  env_.advance_clock(config_.read_seconds_per_token * static_cast<double>(read));
  const double decided_at = env_.now();

  if (!config_.multi_agent) {
    single_agent_cycle(pools);
  } else {
    memory_.clear_tasks();
    for (auto& t : observer_.plan()) memory_.enqueue_task(std::move(t));

    QueueView view;
    for (const Task* t : memory_.runnable_tasks()) {
      if (t->kind == TaskKind::Probe) view.probes.push_back({t->task_id, observer_.probe_diagnosticity(*t)});
      else if (t->kind == TaskKind::Execute) view.executes.push_back(observer_.execute_view(t->task_id, t->faults.front()));
    }
    std::optional<TaskKind> chosen;
    if (config_.dynamic_scheduling) {
      const ScheduleDecision d = schedule(observer_.belief().entropy(), view, config_.lambda);
      chosen = d.chosen;
      if (chosen)
        event(EventType::Decision, std::string(chosen == TaskKind::Probe ? "probe" : "execute") +
                                       " rp=" + std::to_string(d.probe_reward) +
                                       " re=" + std::to_string(d.execute_reward));
    } else {
      // Strict alternation whenever both kinds are runnable.
      const bool p = !view.probes.empty(), x = !view.executes.empty();
      if (p && x) chosen = last_kind_ == TaskKind::Probe ? TaskKind::Execute : TaskKind::Probe;
      else if (p) chosen = TaskKind::Probe;
      else if (x) chosen = TaskKind::Execute;
      if (chosen) event(EventType::Decision, chosen == TaskKind::Probe ? "probe" : "execute");
    }
    if (chosen) {
      if (auto task = memory_.dequeue_task(*chosen)) {
        last_kind_ = chosen;
        if (*chosen == TaskKind::Probe) run_probe_task(*task, pools);
        else run_execute_task(*task, pools);
      }
    }
  }

  if (env_.now() <= decided_at) {
    env_.advance_clock(config_.idle_seconds);
    event(EventType::Idle, "");
  }
}

RunTrace Engine::run() {
  AgentPools pools(config_.pools);
  while (!done()) step(pools);
  return trace_;
}

std::vector<RunTrace> run_suite(const std::vector<ScenarioSpec>& specs, const EngineConfig& config,
                                int concurrency, int workers) {
  config.validate();
  if (concurrency < 1) throw ConfigError("concurrency must be at least 1");
  struct Job {
    std::size_t spec;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < specs.size(); ++s)
    for (auto seed : config.seeds) jobs.push_back({s, seed});
  std::vector<RunTrace> out(jobs.size());

  const std::size_t group = static_cast<std::size_t>(concurrency);
  const std::size_t groups = (jobs.size() + group - 1) / group;
  auto run_group = [&](std::size_t g) {
    const std::size_t lo = g * group, hi = std::min(jobs.size(), lo + group);
    std::vector<std::unique_ptr<Engine>> engines;
    for (std::size_t i = lo; i < hi; ++i)
      engines.push_back(std::make_unique<Engine>(specs[jobs[i].spec], jobs[i].seed, config));
    AgentPools pools(config.pools);
    for (;;) {
      Engine* next = nullptr;
      for (auto& e : engines)
        if (!e->done() && (!next || e->now() < next->now())) next = e.get();
      if (!next) break;
      try {
        next->step(pools);
      } catch (const Error& e) {
        std::string dump = "run " + next->trace().scenario_id + " seed " + std::to_string(next->trace().seed) +
                           " aborted at t=" + std::to_string(next->now()) + ": " + e.what();
        const auto& ev = next->trace().events;
        for (std::size_t k = ev.size() > 8 ? ev.size() - 8 : 0; k < ev.size(); ++k)
          dump += "\n  " + std::to_string(ev[k].time) + " " + std::string(to_string(ev[k].type)) + " " + ev[k].detail;
        throw EngineError(dump);
      }
    }
    for (std::size_t i = lo; i < hi; ++i) out[i] = engines[i - lo]->trace();
  };

  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(groups)));
  if (threads == 1) {
    for (std::size_t g = 0; g < groups; ++g) run_group(g);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t g; (g = next.fetch_add(1)) < groups;) {
        try {
          run_group(g);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace aoi
