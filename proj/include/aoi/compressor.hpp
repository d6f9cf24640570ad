#pragma once

// Sliding-window context compression: windows on a fixed stride, rule-based
// criticality extraction, a pluggable per-window summarizer, overlap merging
// and a secondary trim when the merged text still exceeds the target.

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aoi/catalog.hpp"
#include "aoi/memory.hpp"

namespace aoi {

/// Whitespace tokenization; punctuation stays on its token.
std::vector<std::string> tokenize(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);
std::size_t count_tokens(std::string_view text);

struct Window {
  std::size_t index = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::span<const std::string> tokens;
};

/// start_i = i * window_size * overlap_ratio, until start_i reaches the input
/// size. The stride must be a positive integer (ConfigError otherwise).
std::vector<Window> make_windows(std::span<const std::string> tokens, std::size_t window_size,
                                 double overlap_ratio);

/// In decreasing severity.
enum class CriticalKind { ErrorCode = 0, FaultSignature, ThresholdBreach, CausalMarker };

std::string_view to_string(CriticalKind k);

struct CriticalItem {
  CriticalKind kind = CriticalKind::ErrorCode;
  std::string text;
  std::size_t source_window = 0;
  std::string tag_id;
  std::size_t offset = 0;  // first token, relative to the window
  std::size_t length = 0;  // in tokens
};

/// Pattern rules for the four criticality kinds.
class CriticalRules {
 public:
  /// Rules for the shipped catalog's lexicon.
  static const CriticalRules& standard();
  /// JSON with keys "error_code" {"min_letters","max_letters","min_digits","max_digits"},
  /// "signatures" [phrases], "threshold_gauges" [names], "causal" [token patterns, "*" = any].
  static CriticalRules from_json_text(std::string_view text);
  static CriticalRules load(const std::filesystem::path& path);

  std::vector<CriticalItem> extract(std::span<const std::string> tokens, std::size_t window_index) const;
  bool empty() const;

 private:
  bool is_error_code(std::string_view token) const;

  int min_letters_ = 2, max_letters_ = 5, min_digits_ = 3, max_digits_ = 5;
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> signatures_;  // by first word
  std::set<std::string> gauges_;
  std::vector<std::vector<std::string>> causal_;
};

std::vector<CriticalItem> extract_critical(const Window& window,
                                           const CriticalRules& rules = CriticalRules::standard());

struct SummaryResult {
  std::string text;
  bool degraded = false;
};

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  /// Must return at most `budget` tokens.
  virtual SummaryResult summarize(std::span<const std::string> window,
                                  const std::vector<CriticalItem>& items, std::size_t budget) = 0;
  virtual std::string name() const = 0;
};

/// Deterministic extractive summarizer. Critical sentences first, by severity;
/// a critical sentence that does not fit falls back to its span texts; other
/// sentences fill the remaining budget only when no critical was dropped,
/// one per template, earliest first. Output keeps source order.
class ExtractiveSummarizer : public Summarizer {
 public:
  /// `one_per_template` off: fill takes every fitting sentence in order.
  explicit ExtractiveSummarizer(bool one_per_template = true) : one_per_template_(one_per_template) {}
  SummaryResult summarize(std::span<const std::string> window, const std::vector<CriticalItem>& items,
                          std::size_t budget) override;
  std::string name() const override { return "extractive"; }

  /// True when the last call dropped a critical span for lack of budget.
  bool last_dropped_critical() const { return dropped_; }

 private:
  bool one_per_template_ = true;
  bool dropped_ = false;
};

/// Sentence boundaries: a sentence ends at a token ending in '.', '!' or '?'.
std::vector<std::pair<std::size_t, std::size_t>> sentence_ranges(std::span<const std::string> tokens);

/// Template identity of a log sentence: digits collapsed, time and component dropped.
std::string template_key(std::span<const std::string> sentence);

struct CompressionParams {
  std::size_t window_size = 768;
  double overlap_ratio = 0.5;
  double target_ratio = 0.72;
  const CriticalRules* rules = nullptr;  // null: standard rules

  void validate() const;
};

struct CompressionResult {
  std::string summary_text;
  std::size_t raw_tokens = 0;
  std::size_t compressed_tokens = 0;
  std::set<std::string> surviving_tags;  // tags of critical spans present in the output
  bool secondary_pass = false;
  bool degraded = false;
  std::size_t windows = 0;
};

/// Runs the full pipeline on a raw text. Throws ContractViolation naming the
/// summarizer when it returns more than its budget.
CompressionResult compress(std::string_view raw, const CompressionParams& params, Summarizer& summarizer);

/// Removes exact duplicate sentences and critical sentences whose tags are all
/// already present.
std::string merge_overlaps(const std::vector<std::string>& summaries, const CriticalRules& rules);

/// Builds the memory entry for a compression of the given sources. The
/// preserved tags are the surviving tags that the sources actually carried.
CompressedContextEntry make_compressed_entry(const CompressionResult& result,
                                             const std::set<std::string>& source_ids,
                                             const std::set<std::string>& source_tags, double now);

/// 1 - compressed/raw.
double ccr(std::size_t raw_token_count, std::size_t compressed_token_count);
/// |preserved ∩ truth| / |truth|, 1 when truth is empty.
double ips(const std::set<std::string>& ground_truth_tags, const CompressedContextEntry& compressed);

}  // namespace aoi
