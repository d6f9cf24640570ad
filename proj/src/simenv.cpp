#include "aoi/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aoi/errors.hpp"
#include "aoi/rng.hpp"

namespace aoi {
namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string marker(std::string_view span) { return "[CRIT:" + tag_of(span) + "]"; }

std::string gauges_text(const GaugeVector& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ' ';
    out += std::string(kGaugeNames[i]) + "=" + fmt("%.3f", g[i]);
  }
  return out;
}

constexpr std::array<const char*, 8> kNoiseTemplates = {
    "INFO request served path=/api/v1/items status=200 ms=%d.",
    "INFO heartbeat ok seq=%d.",
    "DEBUG cache hit ratio 0.%d.",
    "INFO gc pause %dms.",
    "INFO connection accepted from 10.0.3.%d.",
    "DEBUG scheduler tick %d.",
    "INFO config watcher idle.",
    "INFO metrics flushed count=%d.",
};

}  // namespace

std::string LogLine::render() const {
  char t[32];
  std::snprintf(t, sizeof t, "%.0f", time);
  return std::string(t) + " " + component + " " + severity + " " + text;
}

std::set<std::string> parse_markers(std::string_view text) {
  std::set<std::string> out;
  static constexpr std::string_view open = "[CRIT:";
  std::size_t pos = 0;
  while ((pos = text.find(open, pos)) != std::string_view::npos) {
    const auto start = pos + open.size();
    const auto end = text.find(']', start);
    if (end == std::string_view::npos) break;
    out.emplace(text.substr(start, end - start));
    pos = end;
  }
  return out;
}

std::string Environment::threshold_span(const FaultSpec& f) {
  // The gauge the fault moves most, stated at its faulted level.
  std::size_t g = 0;
  for (std::size_t i = 1; i < f.effect.size(); ++i)
    if (std::abs(f.effect[i]) > std::abs(f.effect[g])) g = i;
  const double level = std::clamp(baseline_gauges()[g] + f.effect[g], 0.0, 1.0);
  return std::string(kGaugeNames[g]) + (f.effect[g] < 0 ? " < " : " > ") + fmt("%.2f", level);
}

std::string Environment::causal_span(const ComponentId& upstream) {
  return "due to upstream " + upstream + " timeout";
}

std::vector<std::string> Environment::planted_spans(const ScenarioSpec& spec,
                                                    const CommandCatalog& catalog) {
  std::set<std::string> spans;
  for (const auto& f : spec.injected_faults) {
    const FaultSpec& fs = catalog.at(f.kind);
    spans.insert(fs.error_code);
    spans.insert(fs.signature);
    spans.insert(threshold_span(fs));
    if (!spec.topology.dependents_of(f.component).empty()) spans.insert(causal_span(f.component));
  }
  return {spans.begin(), spans.end()};
}

Environment::Environment(ScenarioSpec spec, std::uint64_t run_seed, EnvOptions options,
                         const CommandCatalog& catalog)
    : spec_(std::move(spec)), seed_(run_seed), options_(options), catalog_(catalog) {
  spec_.validate(catalog_);
  for (const auto& c : spec_.topology.components)
    state_.components.push_back({c, baseline_gauges(), Health::Healthy, {}});
  injected_.assign(spec_.injected_faults.size(), false);
  // Faults scheduled at t = 0 are present from the start.
  for (std::size_t i = 0; i < spec_.injected_faults.size(); ++i) {
    const auto& f = spec_.injected_faults[i];
    if (f.time <= 0.0) {
      inject(f.component, f.kind, 0.0, true);
      injected_[i] = true;
    }
  }
  recompute();
}

SystemState Environment::monitor() const {
  SystemState m = state_;
  const auto tick = static_cast<std::uint64_t>(std::llround(state_.time * 1000.0));
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    auto& c = m.components[i];
    c.active_faults.clear();
    if (options_.metric_noise <= 0.0) continue;
    for (std::size_t g = 0; g < c.state_vector.size(); ++g) {
      const double u1 = std::max(keyed_unit(seed_, "monitor", tick, i, 2 * g), 1e-12);
      const double u2 = keyed_unit(seed_, "monitor", tick, i, 2 * g + 1);
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
      c.state_vector[g] = std::clamp(c.state_vector[g] + options_.metric_noise * z, 0.0, 1.0);
    }
  }
  return m;
}

SystemState Environment::target() const {
  SystemState t;
  t.time = state_.time;
  for (const auto& c : state_.components)
    t.components.push_back({c.component_id, baseline_gauges(), Health::Healthy, {}});
  return t;
}

double Environment::distance_to_target() const { return state_distance(state_, target()); }

bool Environment::resolved() const {
  if (escalated_) return false;
  for (const auto& c : state_.components)
    if (!c.active_faults.empty()) return false;
  for (const auto& f : injected_)
    if (!f) return false;
  return distance_to_target() < kResolvedDistance;
}

double Environment::first_injection_time() const {
  double t = 0.0;
  bool any = false;
  for (const auto& f : spec_.injected_faults)
    if (!any || f.time < t) t = f.time, any = true;
  return t;
}

std::size_t Environment::component_index(const ComponentId& c) const {
  for (std::size_t i = 0; i < state_.components.size(); ++i)
    if (state_.components[i].component_id == c) return i;
  return state_.components.size();
}

SystemState Environment::snapshot() {
  if (!available_) throw TransportError("environment unavailable");
  events_.push_back({EnvEvent::Snapshot, state_.time});
  return state_;
}

void Environment::restore(const SystemState& snap) {
  if (!available_) throw TransportError("environment unavailable");
  if (snap.components.size() != state_.components.size())
    throw ShapeError("snapshot belongs to a different topology");
  for (std::size_t i = 0; i < snap.components.size(); ++i)
    if (snap.components[i].component_id != state_.components[i].component_id)
      throw ShapeError("snapshot belongs to a different topology");
  const double now = state_.time;
  state_ = snap;
  state_.time = now;
  for (std::size_t i = 0; i < spec_.injected_faults.size(); ++i)
    if (spec_.injected_faults[i].time > snap.time) injected_[i] = false;
  events_.push_back({EnvEvent::Restore, now});
}

void Environment::inject(const ComponentId& c, const FaultKind& kind, double onset, bool storm) {
  ComponentState* comp = state_.find(c);
  if (comp == nullptr || comp->has_fault(kind)) return;
  const FaultSpec& f = catalog_.at(kind);
  const double jitter =
      0.9 + 0.2 * keyed_unit(seed_, "escalation", fnv1a64(c), fnv1a64(kind),
                             static_cast<std::uint64_t>(onset * 1000.0));
  ActiveFault af{kind, onset, onset + f.escalation_window * options_.escalation_scale * jitter, 0,
                 f.effect};
  comp->active_faults.push_back(std::move(af));
  std::sort(comp->active_faults.begin(), comp->active_faults.end(),
            [](const ActiveFault& a, const ActiveFault& b) { return a.kind < b.kind; });
  recompute();
  if (storm && options_.emit_logs) emit_storm(c, f, state_.time);
}

void Environment::recompute() {
  const auto& base = baseline_gauges();
  const std::size_t n = state_.components.size();
  std::vector<GaugeVector> v(n, base);
  std::vector<double> propagated(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& comp = state_.components[i];
    GaugeVector own(base.size(), 0.0);
    for (const auto& f : comp.active_faults)
      for (std::size_t g = 0; g < own.size(); ++g) own[g] += f.contribution[g];
    for (std::size_t g = 0; g < own.size(); ++g) v[i][g] += own[g];
    if (comp.active_faults.empty()) continue;
    // Latency, error rate and availability travel to dependents.
    for (const auto& [dep, hops] : spec_.topology.transitive_dependents(comp.component_id)) {
      const std::size_t j = component_index(dep);
      const double k = std::pow(options_.propagation, hops);
      for (auto g : {Gauge::Latency, Gauge::ErrorRate, Gauge::Availability}) {
        const auto gi = gauge_index(g);
        v[j][gi] += k * own[gi];
        propagated[j] += std::abs(k * own[gi]);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& comp = state_.components[i];
    for (auto& x : v[i]) x = std::clamp(x, 0.0, 1.0);
    comp.state_vector = v[i];
    const double avail = v[i][gauge_index(Gauge::Availability)];
    if (comp.active_faults.empty()) {
      comp.health = propagated[i] > 0.05 ? Health::Degraded : Health::Healthy;
    } else {
      comp.health = (avail < 0.6 || escalated_) ? Health::Failed : Health::Degraded;
    }
  }
}

void Environment::check_escalation() {
  for (auto& comp : state_.components)
    for (const auto& f : comp.active_faults)
      if (state_.time >= f.deadline && !escalated_) {
        escalated_ = true;
        comp.health = Health::Failed;
        if (options_.emit_logs)
          push_log(state_.time, comp.component_id, "ERROR",
                   "outage declared " + f.kind + " escalated beyond recovery.");
      }
}

void Environment::advance_clock(double dt) {
  if (dt < 0) throw ContractViolation("advance_clock needs a non-negative duration");
  const double end = state_.time + dt;
  for (;;) {
    // Next event: an armed injection or a log slot, whichever comes first.
    double t_next = end;
    std::size_t inj = spec_.injected_faults.size();
    for (std::size_t i = 0; i < spec_.injected_faults.size(); ++i) {
      if (injected_[i]) continue;
      const double ti = std::max(spec_.injected_faults[i].time, state_.time);
      if (ti <= t_next && (inj == spec_.injected_faults.size() || ti < t_next)) {
        t_next = ti;
        inj = i;
      }
    }
    const bool slot_due = options_.emit_logs && next_slot_ <= t_next;
    if (slot_due) t_next = next_slot_;
    if (t_next > end) break;
    state_.time = std::max(state_.time, t_next);
    check_escalation();
    if (slot_due) {
      emit_slot(next_slot_, slot_index_);
      ++slot_index_;
      next_slot_ = static_cast<double>(slot_index_) * options_.slot_seconds;
      continue;
    }
    if (inj < spec_.injected_faults.size()) {
      const auto& f = spec_.injected_faults[inj];
      injected_[inj] = true;
      inject(f.component, f.kind, f.time, true);
      continue;
    }
    break;
  }
  state_.time = end;
  check_escalation();
}

void Environment::push_log(double t, const ComponentId& c, std::string severity, std::string text) {
  LogLine line{t, c, std::move(severity), std::move(text), {}};
  line.tags = parse_markers(line.text);
  logs_.push_back(std::move(line));
}

void Environment::emit_root_lines(const ComponentId& c, const FaultSpec& f, double /*t*/, int count) {
  const double t = state_.time;
  push_log(t, c, "ERROR",
           f.error_code + " " + marker(f.error_code) + " " + f.signature + " " + marker(f.signature) +
               ".");
  if (count > 1) {
    const std::string th = threshold_span(f);
    push_log(t, c, "WARN", th + " " + marker(th) + " observed on " + c + ".");
  }
}

void Environment::emit_storm(const ComponentId& c, const FaultSpec& f, double t) {
  emit_root_lines(c, f, t, 2);
  auto rng = keyed_engine(seed_, "storm", fnv1a64(c), fnv1a64(f.kind),
                          static_cast<std::uint64_t>(t * 1000.0));
  std::uniform_int_distribution<int> extra(0, 2);
  for (const auto& [dep, hops] : spec_.topology.transitive_dependents(c)) {
    if (hops > 2) continue;
    const int lines = (hops == 1 ? 4 : 2) + extra(rng);
    const std::string cs = causal_span(c);
    for (int i = 0; i < lines; ++i) {
      if (i % 2 == 0)
        push_log(t, dep, "WARN", "request latency exceeded " + cs + " " + marker(cs) + ".");
      else
        push_log(t, dep, "ERROR", "request failed status=503 retry=" + std::to_string(i) + ".");
    }
  }
}

void Environment::emit_slot(double t, std::uint64_t slot) {
  const auto& comps = state_.components;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const ComponentId& c = comps[i].component_id;
    auto rng = keyed_engine(seed_, "log", fnv1a64(c), slot);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(kNoiseTemplates.size()) - 1);
    std::uniform_int_distribution<int> num(10, 9999);
    const int noise_lines = 1 + static_cast<int>(u(rng) * 3.0);
    for (int k = 0; k < noise_lines; ++k) {
      char buf[128];
      std::snprintf(buf, sizeof buf, kNoiseTemplates[static_cast<std::size_t>(pick(rng))], num(rng));
      std::string text = buf;
      const auto sp = text.find(' ');
      push_log(t, c, text.substr(0, sp), text.substr(sp + 1));
    }
    for (const auto& f : comps[i].active_faults)
      if (u(rng) < options_.root_line_probability)
        emit_root_lines(c, catalog_.at(f.kind), t, u(rng) < 0.5 ? 1 : 2);
    // Dependents of a faulty component complain about it.
    for (const auto& up : spec_.topology.dependencies_of(c)) {
      const ComponentState* us = state_.find(up);
      if (us == nullptr || us->active_faults.empty()) continue;
      if (u(rng) < options_.dependent_line_probability) {
        const std::string cs = causal_span(up);
        push_log(t, c, "WARN", "request latency exceeded " + cs + " " + marker(cs) + ".");
      }
    }
    if (u(rng) < options_.red_herring_probability) {
      const auto& faults = catalog_.faults();
      const auto& f = faults[static_cast<std::size_t>(u(rng) * static_cast<double>(faults.size()))];
      push_log(t, c, "WARN", f.signature + " reported by canary probe.");
    }
  }
}

std::vector<LogLine> Environment::take_logs() {
  std::vector<LogLine> out;
  out.swap(logs_);
  return out;
}

StepOutcome Environment::step(const Command& cmd) {
  if (!available_) throw TransportError("environment unavailable");
  StepOutcome out;
  const CommandRef ref = catalog_.resolve(cmd.raw_text);
  out.role = ref.role;
  out.component = ref.component;
  const std::size_t ci = component_index(ref.component);
  if (ref.role == CommandRole::Unknown || ci == state_.components.size()) {
    out.error = true;
    out.duration = 5.0;
    out.cpu_seconds = 0.1;
    out.text = "error: unrecognized command '" + cmd.raw_text + "'";
    events_.push_back({EnvEvent::Read, state_.time});
    return out;
  }
  const bool read_only = ref.role == CommandRole::Diagnostic || ref.role == CommandRole::Refresh;
  if (read_only != (cmd.classification == Classification::ReadOnly)) {
    out.error = true;
    out.duration = 5.0;
    out.cpu_seconds = 0.1;
    out.text = "error: verb does not match command role";
    events_.push_back({EnvEvent::Read, state_.time});
    return out;
  }
  ComponentState& comp = state_.components[ci];
  out.before = comp.state_vector;

  if (ref.role == CommandRole::Refresh) {
    out.duration = CommandCatalog::kRefreshDuration;
    out.cpu_seconds = 0.2;
    out.text = "metrics " + comp.component_id + " " + gauges_text(comp.state_vector);
    out.after = comp.state_vector;
    events_.push_back({EnvEvent::Read, state_.time});
    return out;
  }
  if (ref.role == CommandRole::Diagnostic) {
    const DiagnosticSpec& d = catalog_.diagnostics()[ref.index];
    double p = CommandCatalog::kFalsePositive;
    for (const auto& f : comp.active_faults)
      p = std::max(p, catalog_.positive_likelihood(ref.index, comp.component_id,
                                                   FaultRef{comp.component_id, f.kind}));
    const bool anomaly = keyed_unit(seed_, "diagnostic", draws_++) < p;
    out.anomaly = anomaly;
    out.duration = d.duration;
    out.cpu_seconds = d.cpu_seconds;
    out.text = cmd.raw_text + ": " + (anomaly ? "ANOMALY" : "NOMINAL");
    out.after = comp.state_vector;
    events_.push_back({EnvEvent::Read, state_.time});
    return out;
  }

  events_.push_back({EnvEvent::Mutation, state_.time});
  ++mutations_;
  auto induce_disruption = [&] {
    if (!comp.has_fault("service-disruption"))
      inject(comp.component_id, "service-disruption", state_.time, true);
  };
  if (ref.role == CommandRole::Harmful) {
    const std::string cid = comp.component_id;
    induce_disruption();
    ComponentState& c2 = *state_.find(cid);
    out.critical = true;
    out.duration = 30.0;
    out.cpu_seconds = 1.0;
    out.text = "critical: destructive change applied on " + cid;
    out.after = c2.state_vector;
    if (options_.emit_logs) push_log(state_.time, cid, "ERROR", "data loss detected after operator command.");
    return out;
  }

  // Remediation step.
  const FaultSpec& fs = catalog_.faults()[ref.index];
  const RemediationStep& rs = fs.remediation[static_cast<std::size_t>(ref.stage)];
  out.duration = rs.duration;
  out.cpu_seconds = rs.cpu_seconds;
  ActiveFault* af = comp.fault(fs.kind);
  const std::string cid = comp.component_id;
  if (af == nullptr || af->remediation_stage != ref.stage) {
    induce_disruption();
    out.text = "ok: " + cmd.raw_text;
  } else if (ref.stage + 1 == static_cast<int>(fs.remediation.size())) {
    comp.active_faults.erase(comp.active_faults.begin() + (af - comp.active_faults.data()));
    recompute();
    out.text = "ok: " + cmd.raw_text;
  } else {
    for (std::size_t g = 0; g < af->contribution.size(); ++g) {
      if (fs.effect[g] == 0.0) continue;
      const double u = keyed_unit(seed_, "noise", draws_++) * 2.0 - 1.0;
      af->contribution[g] -= rs.fraction * fs.effect[g] + u * options_.noise;
    }
    ++af->remediation_stage;
    recompute();
    out.text = "ok: " + cmd.raw_text;
  }
  out.after = state_.find(cid)->state_vector;
  return out;
}

}  // namespace aoi
