#include "aoi/observer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aoi/compressor.hpp"
#include "aoi/errors.hpp"

namespace aoi {

double shannon_entropy_bits(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log2(p);
  return std::max(0.0, h);
}

FaultBelief::FaultBelief(std::vector<Hypothesis> hypotheses, std::vector<double> weights)
    : hypotheses_(std::move(hypotheses)), probs_(std::move(weights)) {
  if (hypotheses_.size() != probs_.size()) throw ShapeError("belief weights and hypotheses differ in size");
  double sum = 0.0;
  for (double w : probs_) {
    if (!(w >= 0.0)) throw ContractViolation("belief weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw ContractViolation("belief weights sum to zero");
  for (double& p : probs_) p /= sum;
  recompute_entropy();
}

FaultBelief FaultBelief::uniform(std::vector<Hypothesis> hypotheses) {
  std::vector<double> w(hypotheses.size(), 1.0);
  return FaultBelief(std::move(hypotheses), std::move(w));
}

void FaultBelief::recompute_entropy() { entropy_ = shannon_entropy_bits(probs_); }

double FaultBelief::probability(const FaultRef& f) const {
  for (std::size_t i = 0; i < hypotheses_.size(); ++i)
    if (hypotheses_[i] && *hypotheses_[i] == f) return probs_[i];
  return 0.0;
}

double FaultBelief::no_fault() const {
  for (std::size_t i = 0; i < hypotheses_.size(); ++i)
    if (!hypotheses_[i]) return probs_[i];
  return 0.0;
}

std::size_t FaultBelief::map_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i)
    if (probs_[i] > probs_[best]) best = i;
  return best;
}

std::vector<std::pair<FaultRef, double>> FaultBelief::ranked() const {
  std::vector<std::pair<FaultRef, double>> out;
  for (std::size_t i = 0; i < hypotheses_.size(); ++i)
    if (hypotheses_[i]) out.emplace_back(*hypotheses_[i], probs_[i]);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

double FaultBelief::update(std::span<const double> likelihood) {
  if (likelihood.size() != probs_.size()) throw ShapeError("likelihood row does not match the belief");
  std::vector<double> post(probs_.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(likelihood[i] >= 0.0)) throw ContractViolation("likelihoods must be non-negative");
    post[i] = probs_[i] * likelihood[i];
    sum += post[i];
  }
  if (!(sum > 0.0)) throw DegenerateEvidence("evidence has zero likelihood under every hypothesis");
  for (double& p : post) p /= sum;
  const double before = entropy_;
  probs_ = std::move(post);
  recompute_entropy();
  return before - entropy_;
}

double estimate_complexity(const Task& task, const CommandCatalog& catalog) {
  std::set<FaultKind> kinds;
  std::set<Category> categories;
  for (const auto& f : task.faults) {
    kinds.insert(f.kind);
    if (const FaultSpec* spec = catalog.find(f.kind)) categories.insert(spec->category);
  }
  return static_cast<double>(task.target_components.size()) + static_cast<double>(kinds.size()) +
         (categories.size() > 1 ? 2.0 : 0.0);
}

std::vector<Task> decompose(const Task& task, const FaultBelief& belief, const Topology& topology,
                            const DecomposeParams& params, const CommandCatalog& catalog) {
  if (task.status != TaskStatus::Pending) throw ContractViolation("only pending tasks are decomposed");
  if (!topology.acyclic()) throw PlanningError("component dependencies form a cycle");
  if (estimate_complexity(task, catalog) <= params.theta_complex) return {task};

  auto priority_of = [&](const ComponentId& c) {
    return static_cast<int>(topology.transitive_dependents(c).size());
  };
  std::vector<Task> probes, executes;
  for (const auto& f : task.faults) {
    const double p = belief.probability(f);
    if (p < params.suspect_threshold) continue;
    if (p < params.confirm_threshold) {
      Task t;
      t.task_id = "probe:" + f.component + ":" + f.kind;
      t.description = "diagnose " + f.kind + " on " + f.component;
      t.kind = TaskKind::Probe;
      t.target_components = {f.component};
      t.faults = {f};
      t.priority = priority_of(f.component);
      t.resource_estimate = 1.0;
      probes.push_back(std::move(t));
    }
    if (p >= params.execute_threshold) {
      Task t;
      t.task_id = "exec:" + f.component + ":" + f.kind;
      t.description = "remediate " + f.kind + " on " + f.component;
      t.kind = TaskKind::Execute;
      t.target_components = {f.component};
      t.faults = {f};
      t.priority = priority_of(f.component);
      t.resource_estimate = static_cast<double>(catalog.at(f.kind).remediation.size());
      executes.push_back(std::move(t));
    }
  }
  // An execute on a dependent waits for executes on anything it depends on.
  for (auto& t : executes)
    for (const auto& u : executes) {
      if (&t == &u) continue;
      const ComponentId& mine = t.faults.front().component;
      const ComponentId& theirs = u.faults.front().component;
      if (mine == theirs) continue;
      for (const auto& [dep, hops] : topology.transitive_dependents(theirs))
        if (dep == mine) t.depends_on.insert(u.task_id);
    }
  std::vector<Task> out;
  out.reserve(probes.size() + executes.size());
  for (auto& t : executes) out.push_back(std::move(t));
  for (auto& t : probes) out.push_back(std::move(t));
  std::stable_sort(out.begin(), out.end(), [](const Task& a, const Task& b) { return a.priority > b.priority; });
  if (!is_acyclic(out)) throw PlanningError("decomposition produced a dependency cycle");
  return out;
}

double PendingExecute::expected_progress() const {
  if (current_distance <= 0.0) return 0.0;
  const double frac = std::clamp((current_distance - predicted_distance) / current_distance, 0.0, 1.0);
  return std::clamp(posterior * frac, 0.0, 1.0);
}

ScheduleDecision schedule(double entropy_bits, const QueueView& view, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw ContractViolation("lambda must lie in [0, 1]");
  ScheduleDecision d;
  d.lambda = lambda;
  TaskId best_probe, best_exec;
  double probe_value = -1.0, exec_value = -1.0;
  for (const auto& p : view.probes) {
    const double v = std::clamp(entropy_bits * p.diagnosticity, 0.0, 1.0);
    if (v > probe_value) probe_value = v, best_probe = p.task_id;
  }
  for (const auto& e : view.executes) {
    const double v = e.expected_progress();
    if (v > exec_value) exec_value = v, best_exec = e.task_id;
  }
  d.probe_reward = view.probes.empty() ? 0.0 : lambda * probe_value;
  d.execute_reward = view.executes.empty() ? 0.0 : (1.0 - lambda) * exec_value;
  if (view.probes.empty() && view.executes.empty()) return d;
  if (view.probes.empty() || (!view.executes.empty() && d.execute_reward >= d.probe_reward)) {
    d.chosen = TaskKind::Execute;
    d.task_id = best_exec;
  } else {
    d.chosen = TaskKind::Probe;
    d.task_id = best_probe;
  }
  return d;
}

SystemState predict_state(const SystemState& shape, const Hypothesis& h, const Topology& topology,
                          const CommandCatalog& catalog) {
  SystemState out;
  out.time = shape.time;
  const auto& base = baseline_gauges();
  for (const auto& c : shape.components) out.components.push_back({c.component_id, base, Health::Healthy, {}});
  if (!h) return out;
  const FaultSpec& f = catalog.at(h->kind);
  if (ComponentState* c = out.find(h->component))
    for (std::size_t g = 0; g < base.size(); ++g) c->state_vector[g] += f.effect[g];
  for (const auto& [dep, hops] : topology.transitive_dependents(h->component)) {
    ComponentState* d = out.find(dep);
    if (d == nullptr) continue;
    const double k = std::pow(0.5, hops);
    for (auto g : {Gauge::Latency, Gauge::ErrorRate, Gauge::Availability})
      d->state_vector[gauge_index(g)] += k * f.effect[gauge_index(g)];
  }
  for (auto& c : out.components)
    for (auto& x : c.state_vector) x = std::clamp(x, 0.0, 1.0);
  return out;
}

FaultBelief symptom_prior(const SystemState& observed, const Topology& topology, const ObserverConfig& config,
                          const CommandCatalog& catalog) {
  std::vector<Hypothesis> hyps;
  for (const auto& c : observed.components)
    for (const auto& f : catalog.faults()) hyps.emplace_back(FaultRef{c.component_id, f.kind});
  hyps.emplace_back(std::nullopt);

  const double pair_prior = (1.0 - config.no_fault_prior) / static_cast<double>(hyps.size() - 1);
  std::vector<double> logw(hyps.size());
  const double two_s2 = 2.0 * config.symptom_sigma * config.symptom_sigma;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const double d = state_distance(observed, predict_state(observed, hyps[i], topology, catalog));
    const double prior = hyps[i] ? pair_prior : config.no_fault_prior;
    logw[i] = std::log(prior) - d * d / two_s2;
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) w[i] = std::exp(logw[i] - mx);
  return FaultBelief(std::move(hyps), std::move(w));
}

std::vector<LogMention> parse_mentions(std::string_view text, const Topology& topology,
                                       const CommandCatalog& catalog) {
  std::vector<LogMention> out;
  const auto tokens = tokenize(text);
  auto clean = [](std::string_view t) {
    while (!t.empty() && std::string_view(".,;:!?").find(t.back()) != std::string_view::npos) t.remove_suffix(1);
    return std::string(t);
  };
  auto numeric = [](std::string_view t) {
    return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  };
  for (const auto& [b, e] : sentence_ranges(tokens)) {
    if (e - b < 3 || !numeric(tokens[b]) || !topology.contains(tokens[b + 1])) continue;
    const ComponentId& comp = tokens[b + 1];
    std::vector<std::string> words;
    for (std::size_t i = b + 2; i < e; ++i)
      if (tokens[i].rfind("[CRIT:", 0) != 0) words.push_back(clean(tokens[i]));
    const std::string line = " " + join_tokens(words) + " ";
    for (const auto& f : catalog.faults()) {
      if (line.find(" " + f.error_code + " ") != std::string::npos ||
          line.find(" " + f.signature + " ") != std::string::npos)
        out.push_back({comp, f.kind, std::nullopt});
    }
    for (std::size_t i = 0; i + 4 < words.size(); ++i)
      if (words[i] == "due" && words[i + 1] == "to" && words[i + 2] == "upstream" && topology.contains(words[i + 3]))
        out.push_back({comp, std::nullopt, words[i + 3]});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> mention_likelihood(const LogMention& m, const FaultBelief& belief, const Topology& topology,
                                       const ObserverConfig& config) {
  std::vector<double> row(belief.size(), config.q_noise);
  std::set<ComponentId> upstream_of_line;
  for (const auto& c : topology.components)
    for (const auto& [dep, hops] : topology.transitive_dependents(c))
      if (dep == m.component) upstream_of_line.insert(c);
  for (std::size_t i = 0; i < belief.size(); ++i) {
    const Hypothesis& h = belief.hypotheses()[i];
    if (!h) continue;
    if (m.kind) {
      if (h->component == m.component && h->kind == *m.kind)
        row[i] = config.q_direct;
      else if (*m.kind == CommandCatalog::kEchoKind && upstream_of_line.count(h->component))
        row[i] = config.q_propagated;
    } else if (m.upstream && h->component == *m.upstream) {
      row[i] = config.q_direct;
    }
  }
  return row;
}

std::vector<double> diagnostic_likelihood(std::size_t diagnostic, const ComponentId& target, bool anomaly,
                                          const FaultBelief& belief, const CommandCatalog& catalog) {
  std::vector<double> row(belief.size());
  for (std::size_t i = 0; i < belief.size(); ++i) {
    const double p = catalog.positive_likelihood(diagnostic, target, belief.hypotheses()[i]);
    row[i] = anomaly ? p : 1.0 - p;
  }
  return row;
}

Observer::Observer(Topology topology, ObserverConfig config, const CommandCatalog& catalog)
    : topology_(std::move(topology)), config_(config), catalog_(catalog) {
  if (config_.lambda < 0.0 || config_.lambda > 1.0) throw ConfigError("lambda must lie in [0, 1]");
  if (config_.symptom_sigma <= 0.0) throw ConfigError("symptom sigma must be positive");
}

std::set<ComponentId> Observer::symptomatic() const { return symptoms_; }

bool Observer::observe(const SystemState& metrics, double now) {
  observed_ = metrics;
  std::set<ComponentId> now_symptoms;
  const auto& base = baseline_gauges();
  for (const auto& c : metrics.components) {
    double d2 = 0.0;
    for (std::size_t g = 0; g < base.size(); ++g) d2 += (c.state_vector[g] - base[g]) * (c.state_vector[g] - base[g]);
    if (std::sqrt(d2) > config_.symptom_threshold) now_symptoms.insert(c.component_id);
  }
  bool grew = false;
  for (const auto& c : now_symptoms)
    if (!symptoms_.count(c)) grew = true;
  const bool cleared = now_symptoms.empty() && !symptoms_.empty();
  symptoms_ = std::move(now_symptoms);
  if (started_ && !grew && !cleared && !fix_reported_) return false;
  // Logs written before a fix or a full recovery describe a state that is gone.
  if (cleared || fix_reported_) stale_before_ = now;
  started_ = true;
  fix_reported_ = false;
  ++episodes_;
  belief_ = symptom_prior(observed_, topology_, config_, catalog_);
  seen_mentions_.clear();
  read_entries_.clear();
  for (const auto& c : topology_.components) last_update_[c] = now;
  return true;
}

double Observer::apply(std::span<const double> likelihood) {
  try {
    return belief_.update(likelihood);
  } catch (const DegenerateEvidence&) {
    ++degenerate_;
    return 0.0;
  }
}

std::size_t Observer::read_context(const MemoryStore& memory, Layer layer, double now) {
  std::vector<std::string> keywords(symptoms_.begin(), symptoms_.end());
  keywords.push_back("error");
  keywords.push_back("warn");
  std::size_t read = 0;
  for (const auto& hit : memory.query_context(keywords, layer, now)) {
    if (hit.created_at < stale_before_) continue;
    const std::size_t tokens = count_tokens(*hit.text);
    if (read + tokens > config_.context_capacity) continue;
    read += tokens;
    if (!read_entries_.insert(hit.entry_id).second) continue;
    for (const auto& m : parse_mentions(*hit.text, topology_, catalog_)) {
      if (!seen_mentions_.insert(m).second) continue;
      apply(mention_likelihood(m, belief_, topology_, config_));
    }
  }
  return read;
}

double Observer::apply_diagnostic(std::size_t diagnostic, const ComponentId& target, bool anomaly, double now) {
  last_update_[target] = now;
  return apply(diagnostic_likelihood(diagnostic, target, anomaly, belief_, catalog_));
}

void Observer::apply_failed_remediation(const FaultRef& f) {
  std::vector<double> row(belief_.size(), config_.remediation_fail_other);
  for (std::size_t i = 0; i < belief_.size(); ++i)
    if (belief_.hypotheses()[i] && *belief_.hypotheses()[i] == f) row[i] = config_.remediation_fail_true;
  apply(row);
}

double Observer::last_update(const ComponentId& c) const {
  auto it = last_update_.find(c);
  return it == last_update_.end() ? 0.0 : it->second;
}

Task Observer::root_task() const {
  Task t;
  t.task_id = "incident";
  t.description = "restore service";
  t.kind = TaskKind::Composite;
  t.target_components = symptoms_;
  for (const auto& [f, p] : belief_.ranked()) {
    if (p < config_.decompose.suspect_threshold) break;
    t.faults.push_back(f);
    t.target_components.insert(f.component);
  }
  return t;
}

std::vector<Task> Observer::plan() const {
  Task root = root_task();
  if (root.faults.empty()) return {};
  auto tasks = decompose(root, belief_, topology_, config_.decompose, catalog_);
  // Nothing to remediate while every component reads at baseline.
  const bool symptomatic = !symptoms_.empty();
  if (tasks.size() == 1 && tasks.front().task_id == root.task_id) {
    Task& t = tasks.front();
    const auto ranked = belief_.ranked();
    const auto& [top, p] = ranked.front();
    if (symptomatic && p >= config_.decompose.execute_threshold && p >= belief_.no_fault()) {
      t.kind = TaskKind::Execute;
      t.faults = {top};
      t.target_components = {top.component};
      t.resource_estimate = static_cast<double>(catalog_.at(top.kind).remediation.size());
    } else {
      t.kind = TaskKind::Probe;
      t.resource_estimate = static_cast<double>(t.faults.size());
    }
  } else if (!symptomatic) {
    std::erase_if(tasks, [](const Task& t) { return t.kind == TaskKind::Execute; });
  }
  return tasks;
}

PendingExecute Observer::execute_view(const TaskId& id, const FaultRef& f) const {
  PendingExecute e;
  e.task_id = id;
  e.posterior = belief_.probability(f);
  SystemState target;
  for (const auto& c : observed_.components)
    target.components.push_back({c.component_id, baseline_gauges(), Health::Healthy, {}});
  e.current_distance = state_distance(observed_, target);
  const SystemState pred = predict_state(observed_, f, topology_, catalog_);
  SystemState after = observed_;
  for (std::size_t i = 0; i < after.components.size(); ++i)
    for (std::size_t g = 0; g < after.components[i].state_vector.size(); ++g) {
      const double delta = pred.components[i].state_vector[g] - baseline_gauges()[g];
      after.components[i].state_vector[g] = std::clamp(after.components[i].state_vector[g] - delta, 0.0, 1.0);
    }
  e.predicted_distance = state_distance(after, target);
  return e;
}

double Observer::probe_diagnosticity(const Task& t) const {
  double best = 0.0;
  for (const auto& f : t.faults)
    best = std::max(best, catalog_.diagnostics()[catalog_.diagnostic_for(f.kind)].diagnosticity);
  return best;
}

}  // namespace aoi
