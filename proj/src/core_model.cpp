#include "aoi/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "aoi/errors.hpp"

namespace aoi {

std::string_view to_string(Health h) {
  switch (h) {
    case Health::Healthy: return "healthy";
    case Health::Degraded: return "degraded";
    case Health::Failed: return "failed";
  }
  return "?";
}

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Probe: return "probe";
    case TaskKind::Execute: return "execute";
    case TaskKind::Composite: return "composite";
  }
  return "?";
}

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Pending: return "pending";
    case TaskStatus::Running: return "running";
    case TaskStatus::Done: return "done";
    case TaskStatus::Failed: return "failed";
  }
  return "?";
}

const ActiveFault* ComponentState::fault(std::string_view kind) const {
  auto it = std::find_if(active_faults.begin(), active_faults.end(),
                         [&](const ActiveFault& f) { return f.kind == kind; });
  return it == active_faults.end() ? nullptr : &*it;
}

ActiveFault* ComponentState::fault(std::string_view kind) {
  auto it = std::find_if(active_faults.begin(), active_faults.end(),
                         [&](const ActiveFault& f) { return f.kind == kind; });
  return it == active_faults.end() ? nullptr : &*it;
}

bool ComponentState::has_fault(std::string_view kind) const { return fault(kind) != nullptr; }

const ComponentState* SystemState::find(std::string_view id) const {
  for (const auto& c : components)
    if (c.component_id == id) return &c;
  return nullptr;
}

ComponentState* SystemState::find(std::string_view id) {
  for (auto& c : components)
    if (c.component_id == id) return &c;
  return nullptr;
}

std::size_t SystemState::dimension() const {
  return components.empty() ? kDefaultDimension : components.front().state_vector.size();
}

void SystemState::validate() const {
  std::unordered_set<std::string> seen;
  const std::size_t d = dimension();
  for (const auto& c : components) {
    if (!seen.insert(c.component_id).second)
      throw ContractViolation("duplicate component id: " + c.component_id);
    if (c.state_vector.size() != d)
      throw ShapeError("component " + c.component_id + " has dimension " +
                       std::to_string(c.state_vector.size()) + ", expected " +
                       std::to_string(d));
    if (c.health == Health::Failed && c.active_faults.empty())
      throw ContractViolation("component " + c.component_id + " is Failed without an active fault");
  }
}

bool same_ground_truth(const SystemState& a, const SystemState& b) {
  return a.components == b.components;
}

void CostWeights::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0)
    throw ContractViolation("cost weights must be non-negative");
  if (alpha + beta + gamma <= 0) throw ContractViolation("cost weights must not all be zero");
}

double cost(const OperationalOutcome& outcome, const CostWeights& weights) {
  weights.validate();
  if (outcome.completion_time < 0 || outcome.resource_cost < 0 || outcome.risk_score < 0)
    throw ContractViolation("cost outcome fields must be non-negative");
  return weights.alpha * outcome.completion_time + weights.beta * outcome.resource_cost +
         weights.gamma * outcome.risk_score;
}

double state_distance(const SystemState& current, const SystemState& target) {
  if (current.components.size() != target.components.size())
    throw ShapeError("component sets differ in size");
  double sum = 0.0;
  for (const auto& c : current.components) {
    const ComponentState* t = target.find(c.component_id);
    if (t == nullptr) throw ShapeError("component " + c.component_id + " missing from target");
    if (t->state_vector.size() != c.state_vector.size())
      throw ShapeError("dimension mismatch on component " + c.component_id);
    for (std::size_t i = 0; i < c.state_vector.size(); ++i) {
      const double diff = c.state_vector[i] - t->state_vector[i];
      sum += diff * diff;
    }
  }
  return std::sqrt(sum);
}

bool is_acyclic(std::span<const Task> tasks) {
  std::map<TaskId, const Task*> by_id;
  for (const auto& t : tasks) by_id[t.task_id] = &t;

  // 0 = unvisited, 1 = on stack, 2 = finished
  std::map<TaskId, int> mark;
  std::vector<std::pair<const Task*, std::set<TaskId>::const_iterator>> stack;
  for (const auto& root : tasks) {
    if (mark[root.task_id] != 0) continue;
    mark[root.task_id] = 1;
    stack.emplace_back(&root, root.depends_on.begin());
    while (!stack.empty()) {
      auto& [task, it] = stack.back();
      if (it == task->depends_on.end()) {
        mark[task->task_id] = 2;
        stack.pop_back();
        continue;
      }
      const TaskId dep = *it++;
      auto found = by_id.find(dep);
      if (found == by_id.end()) continue;
      int& m = mark[dep];
      if (m == 1) return false;
      if (m == 0) {
        m = 1;
        stack.emplace_back(found->second, found->second->depends_on.begin());
      }
    }
  }
  return true;
}

}  // namespace aoi
