#include "aoi/memory.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include <json.hpp>

#include "aoi/errors.hpp"

namespace aoi {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::Probe: return "probe";
    case Source::Executor: return "executor";
    case Source::Environment: return "environment";
  }
  return "?";
}

std::vector<std::string> context_terms(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && (cur.back() == '.' || cur.back() == ':' || cur.back() == '-'))
      cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '-' || ch == '_' || ch == '.' || ch == ':') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

namespace {

std::unordered_set<std::string> term_set(std::string_view text) {
  auto terms = context_terms(text);
  return {terms.begin(), terms.end()};
}

}  // namespace

MemoryStore::MemoryStore(MemoryConfig config) : config_(config) {
  if (config_.raw_ttl <= 0 || config_.compressed_ttl <= 0)
    throw ConfigError("memory TTLs must be positive");
}

bool MemoryStore::alive(double created_at, double ttl, double now) const {
  if (config_.flat) return true;
  return now - created_at < ttl;
}

std::string MemoryStore::next_id(const char* prefix) {
  for (;;) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%08llu", prefix,
                  static_cast<unsigned long long>(++id_counter_));
    if (!used_ids_.count(buf)) return buf;
  }
}

std::string MemoryStore::put_raw(RawContextEntry entry) {
  if (entry.entry_id.empty()) entry.entry_id = next_id("raw");
  if (used_ids_.count(entry.entry_id)) throw RejectedError("duplicate entry id " + entry.entry_id);
  if (entry.created_at < 0) throw RejectedError("negative created_at on " + entry.entry_id);
  entry.ttl = config_.raw_ttl;
  used_ids_.insert(entry.entry_id);
  raw_tags_[entry.entry_id] = entry.critical_tags;
  raw_index_[entry.entry_id] = raw_.size();
  journal_raw(entry);
  auto terms = term_set(entry.text);
  raw_.push_back({std::move(entry), std::move(terms)});
  ++puts_;
  return raw_.back().entry.entry_id;
}

std::string MemoryStore::put_compressed(CompressedContextEntry entry) {
  if (entry.entry_id.empty()) entry.entry_id = next_id("cmp");
  if (used_ids_.count(entry.entry_id)) throw RejectedError("duplicate entry id " + entry.entry_id);
  if (entry.source_entry_ids.empty())
    throw RejectedError("compressed entry " + entry.entry_id + " has no source entries");
  std::set<std::string> source_tags;
  for (const auto& sid : entry.source_entry_ids) {
    auto it = raw_tags_.find(sid);
    if (it == raw_tags_.end())
      throw RejectedError("compressed entry " + entry.entry_id + " cites unknown source " + sid);
    source_tags.insert(it->second.begin(), it->second.end());
  }
  for (const auto& tag : entry.preserved_tags)
    if (!source_tags.count(tag))
      throw RejectedError("preserved tag " + tag + " is not carried by any source entry");
  entry.ttl = config_.compressed_ttl;
  used_ids_.insert(entry.entry_id);
  compressed_index_[entry.entry_id] = compressed_.size();
  journal_compressed(entry);
  auto terms = term_set(entry.summary_text);
  compressed_.push_back({std::move(entry), std::move(terms)});
  ++puts_;
  return compressed_.back().entry.entry_id;
}

const RawContextEntry* MemoryStore::get_raw(const std::string& id, double now) const {
  auto it = raw_index_.find(id);
  if (it == raw_index_.end()) return nullptr;
  const auto& e = raw_[it->second].entry;
  return alive(e.created_at, e.ttl, now) ? &e : nullptr;
}

const CompressedContextEntry* MemoryStore::get_compressed(const std::string& id, double now) const {
  auto it = compressed_index_.find(id);
  if (it == compressed_index_.end()) return nullptr;
  const auto& e = compressed_[it->second].entry;
  return alive(e.created_at, e.ttl, now) ? &e : nullptr;
}

std::size_t MemoryStore::expire(double now) {
  if (last_expire_ && now < *last_expire_)
    throw ContractViolation("expire clock went backwards");
  last_expire_ = now;
  if (config_.flat) return 0;

  std::size_t removed = 0;
  auto sweep = [&](auto& slots, auto& index) {
    const auto before = slots.size();
    slots.erase(std::remove_if(slots.begin(), slots.end(),
                               [&](const auto& s) {
                                 return !alive(s.entry.created_at, s.entry.ttl, now);
                               }),
                slots.end());
    if (slots.size() != before) {
      index.clear();
      for (std::size_t i = 0; i < slots.size(); ++i) index[slots[i].entry.entry_id] = i;
    }
    removed += before - slots.size();
  };
  sweep(raw_, raw_index_);
  sweep(compressed_, compressed_index_);
  expired_ += removed;
  return removed;
}

std::vector<ContextHit> MemoryStore::query_context(const std::vector<std::string>& keywords,
                                                   Layer layer, double now) const {
  if (keywords.empty()) throw ContractViolation("query_context needs at least one keyword");
  std::vector<std::string> kw;
  for (const auto& k : keywords)
    for (auto& t : context_terms(k)) kw.push_back(std::move(t));
  std::sort(kw.begin(), kw.end());
  kw.erase(std::unique(kw.begin(), kw.end()), kw.end());

  std::vector<ContextHit> hits;
  auto score_of = [&](const std::unordered_set<std::string>& terms) {
    int s = 0;
    for (const auto& k : kw) s += terms.count(k) ? 1 : 0;
    return s;
  };
  const bool want_raw = config_.flat || layer == Layer::Raw;
  const bool want_cmp = config_.flat || layer == Layer::Compressed;
  if (want_raw) {
    for (const auto& s : raw_) {
      if (!alive(s.entry.created_at, s.entry.ttl, now)) continue;
      const int sc = score_of(s.terms);
      if (sc > 0)
        hits.push_back({s.entry.entry_id, Layer::Raw, s.entry.created_at, &s.entry.text,
                        &s.entry.critical_tags, sc});
    }
  }
  if (want_cmp) {
    for (const auto& s : compressed_) {
      if (!alive(s.entry.created_at, s.entry.ttl, now)) continue;
      const int sc = score_of(s.terms);
      if (sc > 0)
        hits.push_back({s.entry.entry_id, Layer::Compressed, s.entry.created_at,
                        &s.entry.summary_text, &s.entry.preserved_tags, sc});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const ContextHit& a, const ContextHit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.created_at != b.created_at) return a.created_at > b.created_at;
    return a.entry_id < b.entry_id;
  });
  return hits;
}

void MemoryStore::enqueue_task(Task task) {
  auto st = statuses_.find(task.task_id);
  if (st != statuses_.end() &&
      (st->second == TaskStatus::Pending || st->second == TaskStatus::Running))
    throw RejectedError("task " + task.task_id + " is already queued");
  for (const auto& dep : task.depends_on)
    if (!statuses_.count(dep))
      throw ContractViolation("task " + task.task_id + " depends on unknown task " + dep);
  task.status = TaskStatus::Pending;
  statuses_[task.task_id] = TaskStatus::Pending;
  queue_.push_back({std::move(task), task_seq_++});
}

bool MemoryStore::ready(const Task& t) const {
  if (config_.flat) return true;
  return std::all_of(t.depends_on.begin(), t.depends_on.end(), [&](const TaskId& d) {
    auto it = statuses_.find(d);
    return it != statuses_.end() && it->second == TaskStatus::Done;
  });
}

std::vector<const Task*> MemoryStore::runnable_tasks() const {
  std::vector<const Task*> out;
  for (const auto& q : queue_)
    if (ready(q.task)) out.push_back(&q.task);
  return out;
}

std::optional<Task> MemoryStore::dequeue_task(std::optional<TaskKind> kind) {
  std::size_t best = queue_.size();
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    const Task& t = queue_[i].task;
    if (kind && t.kind != *kind) continue;
    if (!ready(t)) continue;
    if (config_.flat) {
      best = i;
      break;
    }
    if (best == queue_.size() || t.priority > queue_[best].task.priority ||
        (t.priority == queue_[best].task.priority && queue_[i].seq < queue_[best].seq))
      best = i;
  }
  if (best == queue_.size()) return std::nullopt;
  Task out = std::move(queue_[best].task);
  queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(best));
  out.status = TaskStatus::Running;
  statuses_[out.task_id] = TaskStatus::Running;
  return out;
}

void MemoryStore::complete_task(const TaskId& id, TaskStatus status) {
  auto it = statuses_.find(id);
  if (it == statuses_.end() || it->second != TaskStatus::Running)
    throw ContractViolation("task " + id + " is not running");
  if (status != TaskStatus::Done && status != TaskStatus::Failed)
    throw ContractViolation("tasks complete as Done or Failed");
  it->second = status;
}

void MemoryStore::clear_tasks() {
  for (const auto& q : queue_) statuses_.erase(q.task.task_id);
  queue_.clear();
}

std::optional<TaskStatus> MemoryStore::task_status(const TaskId& id) const {
  auto it = statuses_.find(id);
  if (it == statuses_.end()) return std::nullopt;
  return it->second;
}

void MemoryStore::open_journal(const std::filesystem::path& path) {
  journal_ = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*journal_) throw ConfigError("cannot open memory journal " + path.string());
}

void MemoryStore::journal_raw(const RawContextEntry& e) {
  if (!journal_) return;
  nlohmann::json j{{"kind", "raw"},       {"id", e.entry_id},
                   {"created_at", e.created_at}, {"ttl", e.ttl},
                   {"source", to_string(e.source)}, {"text", e.text},
                   {"tags", e.critical_tags}};
  *journal_ << j.dump() << '\n';
}

void MemoryStore::journal_compressed(const CompressedContextEntry& e) {
  if (!journal_) return;
  nlohmann::json j{{"kind", "compressed"},   {"id", e.entry_id},
                   {"created_at", e.created_at}, {"ttl", e.ttl},
                   {"summary", e.summary_text},  {"sources", e.source_entry_ids},
                   {"tags", e.preserved_tags}};
  *journal_ << j.dump() << '\n';
}

}  // namespace aoi
