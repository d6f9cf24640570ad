#pragma once

// Three-layer memory: raw context (short TTL), a priority task queue with
// dependency gating, and a compressed context cache (long TTL). TTLs run on
// the simulator's logical clock.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aoi/core_model.hpp"

namespace aoi {

inline constexpr double kHour = 3600.0;
inline constexpr double kDay = 24.0 * kHour;

enum class Source { Probe, Executor, Environment };
enum class Layer { Raw, Compressed };

std::string_view to_string(Source s);

struct RawContextEntry {
  std::string entry_id;  // empty: assigned on put
  double created_at = 0.0;
  Source source = Source::Environment;
  std::string text;
  std::set<std::string> critical_tags;
  double ttl = 0.0;  // set from the store's configuration on put
};

struct CompressedContextEntry {
  std::string entry_id;
  double created_at = 0.0;
  std::string summary_text;
  std::set<std::string> source_entry_ids;
  std::set<std::string> preserved_tags;
  double ttl = 0.0;
};

/// A query result, uniform across layers.
struct ContextHit {
  std::string entry_id;
  Layer layer = Layer::Raw;
  double created_at = 0.0;
  const std::string* text = nullptr;  // points into the store; valid until the next mutation
  const std::set<std::string>* tags = nullptr;
  int score = 0;
};

struct MemoryConfig {
  double raw_ttl = 24 * kHour;
  double compressed_ttl = 7 * kDay;
  /// Flat mode: one undifferentiated store. No expiry, queries mix both
  /// layers, and the task queue is plain FIFO without dependency gating.
  bool flat = false;
};

class MemoryStore {
 public:
  explicit MemoryStore(MemoryConfig config = {});

  const MemoryConfig& config() const { return config_; }

  std::string put_raw(RawContextEntry entry);
  std::string put_compressed(CompressedContextEntry entry);

  const RawContextEntry* get_raw(const std::string& id, double now) const;
  const CompressedContextEntry* get_compressed(const std::string& id, double now) const;

  /// Removes every entry whose age reaches its TTL. `now` may not go backwards.
  std::size_t expire(double now);

  /// Entries of `layer` that are still alive at `now`, scored by the number of
  /// distinct keywords they contain. Ties go to the newer entry, then the
  /// smaller id. Keywords must be non-empty.
  std::vector<ContextHit> query_context(const std::vector<std::string>& keywords, Layer layer,
                                        double now) const;

  void enqueue_task(Task task);
  /// Highest-priority task whose dependencies are Done, oldest first on ties;
  /// restricted to `kind` when given. Flat mode: oldest task, no gating.
  std::optional<Task> dequeue_task(std::optional<TaskKind> kind = std::nullopt);
  /// Queued tasks that dequeue_task could return.
  std::vector<const Task*> runnable_tasks() const;
  /// Marks a dequeued task finished. Done unlocks dependents; Failed does not.
  void complete_task(const TaskId& id, TaskStatus status);
  void clear_tasks();
  std::size_t pending_tasks() const { return queue_.size(); }
  std::optional<TaskStatus> task_status(const TaskId& id) const;

  std::size_t live_count() const { return raw_.size() + compressed_.size(); }
  std::size_t raw_count() const { return raw_.size(); }
  std::size_t compressed_count() const { return compressed_.size(); }
  std::uint64_t total_puts() const { return puts_; }
  std::uint64_t total_expired() const { return expired_; }

  /// Appends one JSON object per stored entry to `path`.
  void open_journal(const std::filesystem::path& path);

 private:
  struct RawSlot {
    RawContextEntry entry;
    std::unordered_set<std::string> terms;
  };
  struct CompressedSlot {
    CompressedContextEntry entry;
    std::unordered_set<std::string> terms;
  };
  struct QueuedTask {
    Task task;
    std::uint64_t seq;
  };

  bool alive(double created_at, double ttl, double now) const;
  bool ready(const Task& t) const;
  std::string next_id(const char* prefix);
  void journal_raw(const RawContextEntry& e);
  void journal_compressed(const CompressedContextEntry& e);

  MemoryConfig config_;
  std::vector<RawSlot> raw_;
  std::vector<CompressedSlot> compressed_;
  std::unordered_map<std::string, std::size_t> raw_index_;
  std::unordered_map<std::string, std::size_t> compressed_index_;
  std::unordered_set<std::string> used_ids_;
  std::unordered_map<std::string, std::set<std::string>> raw_tags_;  // outlives expiry
  std::uint64_t id_counter_ = 0;
  std::uint64_t puts_ = 0;
  std::uint64_t expired_ = 0;
  std::optional<double> last_expire_;

  std::vector<QueuedTask> queue_;
  std::map<TaskId, TaskStatus> statuses_;
  std::uint64_t task_seq_ = 0;

  std::unique_ptr<std::ofstream> journal_;
};

/// Lowercased terms of a text: maximal runs of letters, digits, '-', '_', '.'
/// and ':' with trailing punctuation stripped.
std::vector<std::string> context_terms(std::string_view text);

}  // namespace aoi
