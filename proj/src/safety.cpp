#include "aoi/safety.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aoi/errors.hpp"

namespace aoi {
namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::set<std::string> verb_set(const nlohmann::json& arr, const char* key) {
  if (!arr.is_array()) throw ConfigError(std::string("policy key '") + key + "' must be an array");
  std::set<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw ConfigError(std::string("policy key '") + key + "' must hold strings");
    out.insert(upper(v.get<std::string>()));
  }
  return out;
}

}  // namespace

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::ReadOnly: return "read-only";
    case Classification::Mutating: return "mutating";
    case Classification::Unknown: return "unknown";
  }
  return "?";
}

const SafetyPolicy& default_policy() {
  static const SafetyPolicy policy{};
  return policy;
}

SafetyPolicy SafetyPolicy::from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("policy file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("policy file must hold a JSON object");
  SafetyPolicy p;
  if (doc.contains("whitelist")) p.whitelist = verb_set(doc["whitelist"], "whitelist");
  if (doc.contains("blacklist")) p.blacklist = verb_set(doc["blacklist"], "blacklist");
  if (doc.contains("executor_deny")) p.executor_deny = verb_set(doc["executor_deny"], "executor_deny");
  for (const auto& v : p.whitelist)
    if (p.blacklist.count(v)) throw ConfigError("verb " + v + " is both whitelisted and blacklisted");
  return p;
}

SafetyPolicy SafetyPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

Command parse_command(std::string_view statement, const SafetyPolicy& policy) {
  Command cmd;
  statement = trim(statement);
  cmd.raw_text = std::string(statement);

  // Whitespace-separated words; quoted spans stay inside one word.
  std::vector<std::string> words;
  std::string current;
  char quote = 0;
  for (char c : statement) {
    if (quote != 0) {
      current.push_back(c);
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
      current.push_back(c);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) words.push_back(std::move(current)), current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));

  if (!words.empty()) {
    cmd.verb = upper(words.front());
    cmd.arguments.assign(words.begin() + 1, words.end());
  }
  cmd.classification = classify_command(cmd, policy);
  return cmd;
}

std::vector<Command> tokenize_script(std::string_view script, const SafetyPolicy& policy) {
  std::vector<Command> out;
  std::size_t line = 1, column = 0;
  std::size_t quote_line = 0, quote_column = 0;
  char quote = 0;
  std::size_t statement_start = 0;

  auto flush = [&](std::size_t end) {
    std::string_view stmt = trim(script.substr(statement_start, end - statement_start));
    if (!stmt.empty()) out.push_back(parse_command(stmt, policy));
  };

  for (std::size_t i = 0; i < script.size(); ++i) {
    const char c = script[i];
    ++column;
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
      quote_line = line;
      quote_column = column;
    } else if (c == ';' || c == '\n') {
      flush(i);
      statement_start = i + 1;
    }
    if (c == '\n') {
      ++line;
      column = 0;
    }
  }
  if (quote != 0) throw ParseError("unterminated quote", quote_line, quote_column);
  flush(script.size());
  return out;
}

Classification classify_command(const Command& cmd, const SafetyPolicy& policy) {
  const std::string verb = upper(cmd.verb);
  if (policy.whitelist.count(verb)) return Classification::ReadOnly;
  if (policy.blacklist.count(verb)) return Classification::Mutating;
  return Classification::Unknown;
}

SafetyVerdict validate_script(std::span<const Command> commands, PolicyKind policy_kind,
                              const SafetyPolicy& policy) {
  SafetyVerdict verdict;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const Command& cmd = commands[i];
    const std::string verb = upper(cmd.verb);
    if (policy_kind == PolicyKind::Probe) {
      switch (classify_command(cmd, policy)) {
        case Classification::ReadOnly:
          break;
        case Classification::Mutating:
          verdict.violations.push_back({i, verb, "blacklisted verb in read-only script"});
          break;
        case Classification::Unknown:
          verdict.violations.push_back({i, verb, "verb not whitelisted for read-only script"});
          break;
      }
    } else if (policy.executor_deny.count(verb)) {
      verdict.violations.push_back({i, verb, "destructive verb denied for execution"});
    }
  }
  verdict.safe = verdict.violations.empty();
  return verdict;
}

}  // namespace aoi
