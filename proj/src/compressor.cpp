#include "aoi/compressor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aoi/errors.hpp"

namespace aoi {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  std::size_t len = 0;
  for (const auto& t : tokens) len += t.size() + 1;
  out.reserve(len);
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

std::vector<Window> make_windows(std::span<const std::string> tokens, std::size_t window_size,
                                 double overlap_ratio) {
  if (window_size < 2) throw ConfigError("window size must be at least 2");
  if (overlap_ratio < 0.0 || overlap_ratio >= 1.0)
    throw ConfigError("overlap ratio must lie in [0, 1)");
  const double raw_stride =
      overlap_ratio == 0.0 ? static_cast<double>(window_size) : window_size * overlap_ratio;
  const double rounded = std::round(raw_stride);
  if (std::abs(raw_stride - rounded) > 1e-9 || rounded < 1.0)
    throw ConfigError("window_size * overlap_ratio must be a positive integer");
  const auto stride = static_cast<std::size_t>(rounded);

  std::vector<Window> out;
  const std::size_t n = tokens.size();
  if (n == 0) return out;
  if (n <= window_size) {
    out.push_back({0, 0, n, tokens});
    return out;
  }
  for (std::size_t i = 0;; ++i) {
    const std::size_t start = i * stride;
    if (start >= n) break;
    const std::size_t end = std::min(start + window_size, n);
    out.push_back({i, start, end, tokens.subspan(start, end - start)});
  }
  return out;
}

std::string_view to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::ErrorCode: return "error-code";
    case CriticalKind::FaultSignature: return "fault-signature";
    case CriticalKind::ThresholdBreach: return "threshold-breach";
    case CriticalKind::CausalMarker: return "causal-marker";
  }
  return "?";
}

namespace {

bool is_marker(std::string_view token) { return token.rfind("[CRIT:", 0) == 0; }

/// Lowercased token with trailing sentence punctuation removed.
std::string norm(std::string_view token) {
  while (!token.empty() && std::string_view(".,;:!?").find(token.back()) != std::string_view::npos)
    token.remove_suffix(1);
  std::string out(token);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string strip_punct(std::string_view token) {
  while (!token.empty() && std::string_view(".,;:!?").find(token.back()) != std::string_view::npos)
    token.remove_suffix(1);
  return std::string(token);
}

bool is_number(std::string_view s) {
  if (s.empty()) return false;
  bool digit = false, dot = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digit;
}

bool ends_sentence(std::string_view token) {
  return !token.empty() && (token.back() == '.' || token.back() == '!' || token.back() == '?');
}

std::vector<std::string> split_words(std::string_view phrase) {
  std::vector<std::string> out;
  for (auto& t : tokenize(phrase)) out.push_back(norm(t));
  return out;
}

}  // namespace

const CriticalRules& CriticalRules::standard() {
  static const CriticalRules rules = [] {
    CriticalRules r;
    for (const auto& f : CommandCatalog::standard().faults()) {
      auto words = split_words(f.signature);
      r.signatures_[words.front()].push_back(words);
    }
    for (auto g : kGaugeNames) r.gauges_.emplace(g);
    r.causal_ = {{"due", "to", "upstream", "*", "timeout"}, {"caused", "by", "*"}, {"triggered", "by", "*"}};
    return r;
  }();
  return rules;
}

CriticalRules CriticalRules::from_json_text(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("rules file is not valid JSON: ") + e.what());
  }
  CriticalRules r;
  try {
    if (doc.contains("error_code")) {
      const auto& ec = doc["error_code"];
      r.min_letters_ = ec.value("min_letters", r.min_letters_);
      r.max_letters_ = ec.value("max_letters", r.max_letters_);
      r.min_digits_ = ec.value("min_digits", r.min_digits_);
      r.max_digits_ = ec.value("max_digits", r.max_digits_);
    }
    for (const auto& s : doc.value("signatures", std::vector<std::string>{})) {
      auto words = split_words(s);
      if (!words.empty()) r.signatures_[words.front()].push_back(words);
    }
    for (const auto& g : doc.value("threshold_gauges", std::vector<std::string>{})) r.gauges_.insert(norm(g));
    for (const auto& c : doc.value("causal", std::vector<std::string>{})) {
      auto words = split_words(c);
      if (!words.empty()) r.causal_.push_back(words);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("rules file field error: ") + e.what());
  }
  if (r.empty()) throw ConfigError("rules file defines no rules");
  return r;
}

CriticalRules CriticalRules::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rules file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

bool CriticalRules::empty() const {
  return signatures_.empty() && gauges_.empty() && causal_.empty() && max_letters_ < min_letters_;
}

bool CriticalRules::is_error_code(std::string_view token) const {
  const auto dash = token.find('-');
  if (dash == std::string_view::npos) return false;
  const auto letters = static_cast<int>(dash);
  const auto digits = static_cast<int>(token.size() - dash - 1);
  if (letters < min_letters_ || letters > max_letters_ || digits < min_digits_ || digits > max_digits_)
    return false;
  for (std::size_t i = 0; i < dash; ++i)
    if (!std::isupper(static_cast<unsigned char>(token[i]))) return false;
  for (std::size_t i = dash + 1; i < token.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(token[i]))) return false;
  return true;
}

std::vector<CriticalItem> CriticalRules::extract(std::span<const std::string> tokens,
                                                 std::size_t window_index) const {
  std::vector<CriticalItem> out;
  const std::size_t n = tokens.size();
  std::vector<std::string> normed(n);
  for (std::size_t i = 0; i < n; ++i) normed[i] = is_marker(tokens[i]) ? std::string{} : norm(tokens[i]);

  auto add = [&](CriticalKind kind, std::size_t at, std::size_t len) {
    std::vector<std::string> words;
    for (std::size_t k = at; k < at + len; ++k) words.push_back(strip_punct(tokens[k]));
    std::string text = join_tokens(words);
    out.push_back({kind, text, window_index, tag_of(text), at, len});
  };
  auto matches = [&](std::size_t at, const std::vector<std::string>& pattern) {
    if (at + pattern.size() > n) return false;
    for (std::size_t k = 0; k < pattern.size(); ++k) {
      if (normed[at + k].empty()) return false;
      if (pattern[k] != "*" && pattern[k] != normed[at + k]) return false;
      // Only the last word of a span may close a sentence.
      if (k + 1 < pattern.size() && ends_sentence(tokens[at + k])) return false;
    }
    return true;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (normed[i].empty()) continue;
    if (is_error_code(strip_punct(tokens[i]))) add(CriticalKind::ErrorCode, i, 1);
    if (auto it = signatures_.find(normed[i]); it != signatures_.end())
      for (const auto& phrase : it->second)
        if (matches(i, phrase)) add(CriticalKind::FaultSignature, i, phrase.size());
    if (gauges_.count(normed[i]) && i + 2 < n && !ends_sentence(tokens[i]) &&
        !ends_sentence(tokens[i + 1])) {
      const auto& cmp = tokens[i + 1];
      if ((cmp == ">" || cmp == "<" || cmp == ">=" || cmp == "<=") && is_number(strip_punct(tokens[i + 2])))
        add(CriticalKind::ThresholdBreach, i, 3);
    }
    for (const auto& pattern : causal_)
      if (normed[i] == pattern.front() && matches(i, pattern))
        add(CriticalKind::CausalMarker, i, pattern.size());
  }
  return out;
}

std::vector<CriticalItem> extract_critical(const Window& window, const CriticalRules& rules) {
  return rules.extract(window.tokens, window.index);
}

std::vector<std::pair<std::size_t, std::size_t>> sentence_ranges(std::span<const std::string> tokens) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (ends_sentence(tokens[i])) {
      out.emplace_back(start, i + 1);
      start = i + 1;
    }
  if (start < tokens.size()) out.emplace_back(start, tokens.size());
  return out;
}

std::string template_key(std::span<const std::string> sentence) {
  std::size_t from = 0;
  if (sentence.size() >= 3 && is_number(sentence[0])) from = 2;
  std::string key;
  for (std::size_t i = from; i < sentence.size(); ++i) {
    if (!key.empty()) key += ' ';
    bool in_digits = false;
    for (char c : sentence[i]) {
      if (std::isdigit(static_cast<unsigned char>(c))) {
        if (!in_digits) key += '#';
        in_digits = true;
      } else {
        key += c;
        in_digits = false;
      }
    }
  }
  return key;
}

SummaryResult ExtractiveSummarizer::summarize(std::span<const std::string> window,
                                              const std::vector<CriticalItem>& items,
                                              std::size_t budget) {
  dropped_ = false;
  const auto sentences = sentence_ranges(window);
  // Items grouped by the sentence holding their first token.
  std::vector<std::vector<const CriticalItem*>> by_sentence(sentences.size());
  for (const auto& item : items) {
    auto it = std::upper_bound(sentences.begin(), sentences.end(), item.offset,
                               [](std::size_t off, const auto& r) { return off < r.first; });
    if (it == sentences.begin()) continue;
    by_sentence[static_cast<std::size_t>(std::distance(sentences.begin(), it) - 1)].push_back(&item);
  }

  struct Piece {
    std::size_t position;
    std::string text;
  };
  std::vector<Piece> chosen;
  std::set<std::string> covered;
  std::size_t used = 0;

  std::vector<std::size_t> critical;
  for (std::size_t s = 0; s < sentences.size(); ++s)
    if (!by_sentence[s].empty()) {
      std::sort(by_sentence[s].begin(), by_sentence[s].end(),
                [](const CriticalItem* a, const CriticalItem* b) {
                  if (a->kind != b->kind) return a->kind < b->kind;
                  return a->offset < b->offset;
                });
      critical.push_back(s);
    }
  std::stable_sort(critical.begin(), critical.end(), [&](std::size_t a, std::size_t b) {
    return by_sentence[a].front()->kind < by_sentence[b].front()->kind;
  });

  for (std::size_t s : critical) {
    const auto& group = by_sentence[s];
    const bool needed = std::any_of(group.begin(), group.end(),
                                    [&](const CriticalItem* it) { return !covered.count(it->tag_id); });
    if (!needed) continue;
    const auto [b, e] = sentences[s];
    if (used + (e - b) <= budget) {
      chosen.push_back({b, join_tokens(window.subspan(b, e - b))});
      used += e - b;
      for (const auto* it : group) covered.insert(it->tag_id);
      continue;
    }
    for (const auto* it : group) {
      if (covered.count(it->tag_id)) continue;
      if (used + it->length <= budget) {
        chosen.push_back({it->offset, it->text + "."});
        used += it->length;
        covered.insert(it->tag_id);
      } else {
        dropped_ = true;
      }
    }
  }

  if (!dropped_) {
    std::set<std::string> seen_templates;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      if (!by_sentence[s].empty()) continue;
      const auto [b, e] = sentences[s];
      if (used + (e - b) > budget) continue;
      if (one_per_template_ && !seen_templates.insert(template_key(window.subspan(b, e - b))).second) continue;
      chosen.push_back({b, join_tokens(window.subspan(b, e - b))});
      used += e - b;
    }
  }

  std::stable_sort(chosen.begin(), chosen.end(),
                   [](const Piece& a, const Piece& b) { return a.position < b.position; });
  SummaryResult out;
  for (const auto& p : chosen) {
    if (!out.text.empty()) out.text += ' ';
    out.text += p.text;
  }
  return out;
}

void CompressionParams::validate() const {
  if (window_size < 2) throw ConfigError("window size must be at least 2");
  if (overlap_ratio < 0.0 || overlap_ratio >= 1.0) throw ConfigError("overlap ratio must lie in [0, 1)");
  if (!(target_ratio > 0.0 && target_ratio < 1.0)) throw ConfigError("target ratio must lie in (0, 1)");
  const double stride = overlap_ratio == 0.0 ? static_cast<double>(window_size) : window_size * overlap_ratio;
  if (std::abs(stride - std::round(stride)) > 1e-9 || stride < 1.0)
    throw ConfigError("window_size * overlap_ratio must be a positive integer");
}

std::string merge_overlaps(const std::vector<std::string>& summaries, const CriticalRules& rules) {
  std::set<std::string> seen;
  std::set<std::string> covered;
  std::string out;
  for (const auto& summary : summaries) {
    const auto tokens = tokenize(summary);
    for (const auto& [b, e] : sentence_ranges(tokens)) {
      const auto sentence = std::span<const std::string>(tokens).subspan(b, e - b);
      std::string text = join_tokens(sentence);
      if (seen.count(text)) continue;
      const auto items = rules.extract(sentence, 0);
      if (!items.empty() && std::all_of(items.begin(), items.end(), [&](const CriticalItem& it) {
            return covered.count(it.tag_id) > 0;
          }))
        continue;
      for (const auto& it : items) covered.insert(it.tag_id);
      seen.insert(text);
      if (!out.empty()) out += ' ';
      out += text;
    }
  }
  return out;
}

namespace {

void check_budget(const SummaryResult& r, std::size_t budget, const Summarizer& summarizer) {
  if (count_tokens(r.text) > budget)
    throw ContractViolation("summarizer '" + summarizer.name() + "' returned " + std::to_string(count_tokens(r.text)) +
                            " tokens for a budget of " + std::to_string(budget));
}

std::string run_windows(const std::vector<std::string>& tokens, const CompressionParams& params,
                        Summarizer& summarizer, const CriticalRules& rules, bool& degraded,
                        std::size_t& window_count) {
  const auto windows = make_windows(tokens, params.window_size, params.overlap_ratio);
  window_count += windows.size();
  std::vector<std::string> summaries;
  summaries.reserve(windows.size());
  for (const auto& w : windows) {
    const auto items = extract_critical(w, rules);
    const double raw_budget = static_cast<double>(w.tokens.size()) * (1.0 - params.target_ratio);
    const auto budget = static_cast<std::size_t>(std::ceil(raw_budget - 1e-9));
    SummaryResult r = summarizer.summarize(w.tokens, items, budget);
    check_budget(r, budget, summarizer);
    degraded = degraded || r.degraded;
    summaries.push_back(std::move(r.text));
  }
  return merge_overlaps(summaries, rules);
}

}  // namespace

CompressionResult compress(std::string_view raw, const CompressionParams& params, Summarizer& summarizer) {
  params.validate();
  const CriticalRules& rules = params.rules ? *params.rules : CriticalRules::standard();
  const auto tokens = tokenize(raw);
  if (tokens.empty()) throw ContractViolation("compress needs a non-empty input");

  CompressionResult result;
  result.raw_tokens = tokens.size();
  std::string merged = run_windows(tokens, params, summarizer, rules, result.degraded, result.windows);
  const auto target = static_cast<std::size_t>(
      std::ceil((1.0 - params.target_ratio) * static_cast<double>(tokens.size()) - 1e-9));
  if (count_tokens(merged) > target) {
    // Secondary pass: criticals-first trim of the merged text down to the target.
    const auto merged_tokens = tokenize(merged);
    Window whole{0, 0, merged_tokens.size(), merged_tokens};
    ExtractiveSummarizer trim(false);
    merged = trim.summarize(merged_tokens, extract_critical(whole, rules), target).text;
    ++result.windows;
    result.secondary_pass = true;
  }
  const auto out_tokens = tokenize(merged);
  result.compressed_tokens = out_tokens.size();
  for (const auto& item : rules.extract(out_tokens, 0)) result.surviving_tags.insert(item.tag_id);
  result.summary_text = std::move(merged);
  return result;
}

CompressedContextEntry make_compressed_entry(const CompressionResult& result,
                                             const std::set<std::string>& source_ids,
                                             const std::set<std::string>& source_tags, double now) {
  CompressedContextEntry e;
  e.created_at = now;
  e.summary_text = result.summary_text;
  e.source_entry_ids = source_ids;
  std::set_intersection(result.surviving_tags.begin(), result.surviving_tags.end(), source_tags.begin(),
                        source_tags.end(), std::inserter(e.preserved_tags, e.preserved_tags.end()));
  return e;
}

double ccr(std::size_t raw_token_count, std::size_t compressed_token_count) {
  if (raw_token_count == 0) throw ContractViolation("ccr needs a positive raw token count");
  if (compressed_token_count > raw_token_count)
    throw ContractViolation("compressed size exceeds raw size");
  return 1.0 - static_cast<double>(compressed_token_count) / static_cast<double>(raw_token_count);
}

double ips(const std::set<std::string>& ground_truth_tags, const CompressedContextEntry& compressed) {
  if (ground_truth_tags.empty()) return 1.0;
  std::size_t hit = 0;
  for (const auto& t : ground_truth_tags) hit += compressed.preserved_tags.count(t);
  return static_cast<double>(hit) / static_cast<double>(ground_truth_tags.size());
}

}  // namespace aoi
