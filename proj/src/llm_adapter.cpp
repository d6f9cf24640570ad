#include "aoi/llm_adapter.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "aoi/errors.hpp"

namespace aoi {

using nlohmann::json;

std::string parse_completion(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("completion body is not JSON: ") + e.what(), 1, 1);
  }
  if (j.is_object()) {
    if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
      const json& c = j["choices"][0];
      if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
      if (c.contains("message") && c["message"].is_object() && c["message"].contains("content") &&
          c["message"]["content"].is_string())
        return c["message"]["content"].get<std::string>();
    }
  }
  throw ParseError("completion body has no text field", 1, 1);
}

std::string build_prompt(std::span<const std::string> window, const std::vector<CriticalItem>& items,
                         std::size_t budget) {
  std::string p = "Summarize the operations log below in at most " + std::to_string(budget) +
                  " whitespace-separated tokens. Copy these spans verbatim:\n";
  for (const auto& it : items) p += "- " + it.text + "\n";
  p += "\nLog:\n" + join_tokens(window) + "\n";
  return p;
}

InFlightLimiter& InFlightLimiter::instance() {
  static InFlightLimiter limiter;
  return limiter;
}

void InFlightLimiter::acquire(int limit) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < limit; });
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

RemoteSummarizer::RemoteSummarizer(RemoteSummarizerConfig config) : config_(std::move(config)) {
  const char* token = std::getenv(config_.token_env.c_str());
  if (!token || !*token) throw ConfigError("remote summarizer needs a token in $" + config_.token_env);
  token_ = token;
  const std::string& url = config_.endpoint;
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0)
    throw ConfigError("remote summarizer endpoint must be an http URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  host_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (config_.max_in_flight < 1 || config_.max_retries < 0 || config_.timeout_seconds <= 0.0)
    throw ConfigError("remote summarizer settings out of range");
}

std::string RemoteSummarizer::request(const std::string& prompt, std::size_t budget) {
  httplib::Client client(host_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_bearer_token_auth(token_);

  const json body = {{"model", config_.model}, {"prompt", prompt}, {"max_tokens", budget}};
  InFlightLimiter::instance().acquire(config_.max_in_flight);
  auto res = client.Post(path_, body.dump(), "application/json");
  InFlightLimiter::instance().release();
  ++requests_;
  if (!res) throw TransportError("request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  return parse_completion(res->body);
}

SummaryResult RemoteSummarizer::summarize(std::span<const std::string> window,
                                          const std::vector<CriticalItem>& items, std::size_t budget) {
  const std::string prompt = build_prompt(window, items, budget);
  double backoff = config_.backoff_seconds;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    try {
      auto tokens = tokenize(request(prompt, budget));
      if (tokens.size() > budget) tokens.resize(budget);
      return {join_tokens(tokens), false};
    } catch (const TransportError&) {
    } catch (const ParseError&) {
    }
    if (attempt < config_.max_retries && backoff > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
  }
  ++fallbacks_;
  SummaryResult r = fallback_.summarize(window, items, budget);
  r.degraded = true;
  return r;
}

}  // namespace aoi
