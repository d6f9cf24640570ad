#pragma once

// Summarizer backed by an HTTP completion endpoint. Failures degrade to the
// extractive summarizer instead of failing the compression.

#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>

#include "aoi/compressor.hpp"

namespace aoi {

struct RemoteSummarizerConfig {
  std::string endpoint = "http://127.0.0.1:8080/v1/completions";
  std::string model = "summarizer";
  std::string token_env = "AOI_LLM_TOKEN";
  double timeout_seconds = 30.0;
  int max_retries = 2;
  double backoff_seconds = 0.5;  // doubled after each failed attempt
  int max_in_flight = 4;
};

/// Pulls the completion text out of a response body. Accepts {"text": ...},
/// {"choices": [{"text": ...}]} and {"choices": [{"message": {"content": ...}}]}.
/// Throws ParseError otherwise.
std::string parse_completion(std::string_view body);

/// The prompt sent for one window.
std::string build_prompt(std::span<const std::string> window, const std::vector<CriticalItem>& items,
                         std::size_t budget);

class RemoteSummarizer : public Summarizer {
 public:
  /// Throws ConfigError when the token variable is unset or the endpoint is
  /// not an http URL.
  explicit RemoteSummarizer(RemoteSummarizerConfig config);

  SummaryResult summarize(std::span<const std::string> window, const std::vector<CriticalItem>& items,
                          std::size_t budget) override;
  std::string name() const override { return "remote"; }

  std::size_t requests() const { return requests_; }
  std::size_t fallbacks() const { return fallbacks_; }

 private:
  /// One request; throws TransportError or ParseError.
  std::string request(const std::string& prompt, std::size_t budget);

  RemoteSummarizerConfig config_;
  std::string token_;
  std::string host_;  // scheme://host:port
  std::string path_;
  ExtractiveSummarizer fallback_;
  std::size_t requests_ = 0;
  std::size_t fallbacks_ = 0;
};

/// Process-wide cap on concurrent remote requests.
class InFlightLimiter {
 public:
  static InFlightLimiter& instance();
  void acquire(int limit);
  void release();
  int peak() const { return peak_; }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int peak_ = 0;
};

}  // namespace aoi
