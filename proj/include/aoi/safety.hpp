#pragma once

// Statement-level command parsing and whitelist/blacklist classification.
// The Probe path is deny-by-default; the Executor path only refuses the
// configured destructive subset.

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aoi {

enum class Classification { ReadOnly, Mutating, Unknown };

std::string_view to_string(Classification c);

struct Command {
  std::string raw_text;
  std::string verb;  // uppercased first word
  Classification classification = Classification::Unknown;
  std::vector<std::string> arguments;

  bool operator==(const Command&) const = default;
};

/// Verb sets. Defaults are the read-only whitelist, the mutating blacklist
/// and the executor's destructive deny subset.
struct SafetyPolicy {
  std::set<std::string> whitelist{"SELECT", "SHOW", "DESCRIBE", "GET", "LIST", "READ"};
  std::set<std::string> blacklist{"DELETE", "UPDATE", "INSERT", "DROP", "ALTER", "TRUNCATE"};
  std::set<std::string> executor_deny{"DROP", "TRUNCATE"};

  /// Reads a JSON policy file with optional keys "whitelist", "blacklist",
  /// "executor_deny" (arrays of verbs). Missing keys keep the defaults.
  static SafetyPolicy load(const std::filesystem::path& path);
  static SafetyPolicy from_json_text(std::string_view text);
};

const SafetyPolicy& default_policy();

enum class PolicyKind { Probe, Executor };

struct Violation {
  std::size_t index = 0;
  std::string verb;
  std::string reason;
};

struct SafetyVerdict {
  bool safe = true;
  std::vector<Violation> violations;
};

/// Splits on newlines and ';' outside single or double quotes. Throws
/// ParseError naming the opening quote's line and column when a quote is
/// left open.
std::vector<Command> tokenize_script(std::string_view script,
                                     const SafetyPolicy& policy = default_policy());

/// Parses one already-split statement.
Command parse_command(std::string_view statement, const SafetyPolicy& policy = default_policy());

Classification classify_command(const Command& cmd, const SafetyPolicy& policy = default_policy());

/// Reports every offending command, not just the first.
SafetyVerdict validate_script(std::span<const Command> commands, PolicyKind policy_kind,
                              const SafetyPolicy& policy = default_policy());

}  // namespace aoi
