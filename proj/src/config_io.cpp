#include "aoi/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aoi/errors.hpp"

namespace aoi {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }
  ~Reader() = default;

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + " has the wrong type");
    }
  }

  void hours(const char* key, double& seconds, double unit) {
    double v = seconds / unit;
    get(key, v);
    seconds = v * unit;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown configuration key " + where_ + "." + it.key());
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

EngineConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  EngineConfig c;
  Reader r(j, "config");
  r.get("lambda", c.lambda);
  r.get("theta_complex", c.theta_complex);
  r.get("window_size", c.window_size);
  r.get("overlap_ratio", c.overlap_ratio);
  r.get("target_ratio", c.target_ratio);
  r.hours("raw_ttl_hours", c.raw_ttl, kHour);
  r.hours("compressed_ttl_days", c.compressed_ttl, kDay);
  r.get("summarizer", c.summarizer);
  r.get("compressor", c.compressor);
  r.get("dynamic_scheduling", c.dynamic_scheduling);
  r.get("layered_memory", c.layered_memory);
  r.get("multi_agent", c.multi_agent);
  r.get("step_budget", c.step_budget);
  r.get("seeds", c.seeds);
  r.get("aggressive_after_seconds", c.aggressive_after);
  r.get("read_seconds_per_token", c.read_seconds_per_token);
  if (const json* o = r.child("remote")) {
    Reader s(*o, "config.remote");
    s.get("endpoint", c.remote.endpoint);
    s.get("model", c.remote.model);
    s.get("token_env", c.remote.token_env);
    s.get("timeout_seconds", c.remote.timeout_seconds);
    s.get("max_retries", c.remote.max_retries);
    s.get("max_in_flight", c.remote.max_in_flight);
    s.finish();
  }
  if (const json* o = r.child("observer")) {
    Reader s(*o, "config.observer");
    s.get("symptom_sigma", c.observer.symptom_sigma);
    s.get("symptom_threshold", c.observer.symptom_threshold);
    s.get("no_fault_prior", c.observer.no_fault_prior);
    s.get("context_capacity", c.observer.context_capacity);
    s.finish();
  }
  if (const json* o = r.child("executor")) {
    Reader s(*o, "config.executor");
    s.get("divergence_tolerance", c.executor.divergence_tolerance);
    s.get("staleness_bound", c.executor.staleness_bound);
    s.finish();
  }
  if (const json* o = r.child("environment")) {
    Reader s(*o, "config.environment");
    s.get("escalation_scale", c.env.escalation_scale);
    s.get("emit_logs", c.env.emit_logs);
    s.get("metric_noise", c.env.metric_noise);
    s.finish();
  }
  if (const json* o = r.child("pools")) {
    Reader s(*o, "config.pools");
    s.get("probe", c.pools.probe);
    s.get("executor", c.pools.executor);
    s.get("compressor", c.pools.compressor);
    s.finish();
  }
  r.finish();
  c.validate();
  return c;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const EngineConfig& c) {
  ordered_json j;
  j["lambda"] = c.lambda;
  j["theta_complex"] = c.theta_complex;
  j["window_size"] = c.window_size;
  j["overlap_ratio"] = c.overlap_ratio;
  j["target_ratio"] = c.target_ratio;
  j["raw_ttl_hours"] = c.raw_ttl / kHour;
  j["compressed_ttl_days"] = c.compressed_ttl / kDay;
  j["summarizer"] = c.summarizer;
  j["compressor"] = c.compressor;
  j["dynamic_scheduling"] = c.dynamic_scheduling;
  j["layered_memory"] = c.layered_memory;
  j["multi_agent"] = c.multi_agent;
  j["step_budget"] = c.step_budget;
  j["seeds"] = c.seeds;
  j["aggressive_after_seconds"] = c.aggressive_after;
  j["read_seconds_per_token"] = c.read_seconds_per_token;
  j["remote"] = {{"endpoint", c.remote.endpoint},         {"model", c.remote.model},
                 {"token_env", c.remote.token_env},       {"timeout_seconds", c.remote.timeout_seconds},
                 {"max_retries", c.remote.max_retries},   {"max_in_flight", c.remote.max_in_flight}};
  j["observer"] = {{"symptom_sigma", c.observer.symptom_sigma},
                   {"symptom_threshold", c.observer.symptom_threshold},
                   {"no_fault_prior", c.observer.no_fault_prior},
                   {"context_capacity", c.observer.context_capacity}};
  j["executor"] = {{"divergence_tolerance", c.executor.divergence_tolerance},
                   {"staleness_bound", c.executor.staleness_bound}};
  j["environment"] = {{"escalation_scale", c.env.escalation_scale},
                      {"metric_noise", c.env.metric_noise},
                      {"emit_logs", c.env.emit_logs}};
  j["pools"] = {{"probe", c.pools.probe}, {"executor", c.pools.executor}, {"compressor", c.pools.compressor}};
  return j.dump(2) + "\n";
}

}  // namespace aoi
