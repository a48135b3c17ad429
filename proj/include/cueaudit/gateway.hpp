#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "cueaudit/errors.hpp"
#include "cueaudit/prompting.hpp"

namespace cueaudit {

enum class FinishReason { stop, length, error };
std::string_view to_string(FinishReason f);
FinishReason finish_reason_from_string(std::string_view s);

struct Completion {
  std::string text;
  std::optional<std::vector<double>> token_logprobs;  // natural log, all <= 0
  FinishReason finish_reason = FinishReason::stop;
  std::string error;  // set when finish_reason is error

  bool operator==(const Completion&) const = default;
};

nlohmann::json to_json(const Completion& c);
Completion completion_from_json(const nlohmann::json& j);

struct DecodingConfig {
  double temperature = 0.0;
  int max_new_tokens = kPlainMaxNewTokens;
  /// Throws ConfigError on a negative temperature or a zero budget.
  void validate() const;
};

/// Greedy decoding with the job's own token budget.
DecodingConfig decoding_for(const Job& job, double temperature = 0.0);

/// exp(-mean logprob) over the generated tokens; empty without logprobs.
std::optional<double> perplexity(const Completion& c);

/// Retryable failure reaching the backend.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The backend answered with something we cannot decode.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  /// Stable identifier that becomes part of the cache key.
  virtual std::string id() const = 0;
  /// May throw TransportError or DecodeError. Must be thread-safe.
  virtual Completion complete(const Job& job, const DecodingConfig& cfg) = 0;
};

/// Append-only JSONL cache of completions. Concurrent readers, serialized writers.
class ResponseCache {
 public:
  /// In-memory only.
  ResponseCache() = default;
  /// Loads existing entries from `path` and appends new ones to it.
  explicit ResponseCache(std::filesystem::path path);

  std::optional<Completion> get(const std::string& key) const;
  void put(const std::string& key, const Completion& c);
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Completion> entries_;
  std::ofstream out_;
};

std::string cache_key(const std::string& backend_id, const Job& job, const DecodingConfig& cfg);

struct GatewayOptions {
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
  int backoff_ms = 200;  // doubled after every failed attempt
};

struct GatewayStats {
  std::size_t requests = 0;
  std::size_t cache_hits = 0;
  std::size_t retries = 0;
  std::size_t failures = 0;
};

class Gateway {
 public:
  /// `cache` may be null to disable caching.
  Gateway(Backend& backend, ResponseCache* cache, GatewayOptions options = {});

  /// Never throws for backend failures; failed jobs come back with finish_reason error.
  Completion complete(const Job& job, const DecodingConfig& cfg);
  /// Runs up to max_in_flight jobs at once; results are in input order.
  std::vector<Completion> complete_all(const std::vector<Job>& jobs, double temperature = 0.0);

  GatewayStats stats() const;
  const Backend& backend() const { return backend_; }

 private:
  Backend& backend_;
  ResponseCache* cache_;
  GatewayOptions options_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> retries_{0};
  std::atomic<std::size_t> failures_{0};
};

/// OpenAI-style chat completion endpoint.
struct HttpBackendConfig {
  std::string base_url = "http://localhost:8000/v1";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 120;
  bool request_logprobs = true;
};

std::unique_ptr<Backend> make_http_backend(const HttpBackendConfig& cfg);

/// Builds the request body sent for a job.
nlohmann::json chat_request_body(const HttpBackendConfig& cfg, const Job& job, const DecodingConfig& dc);
/// Decodes a chat completion response; throws DecodeError on malformed payloads.
Completion decode_chat_response(const nlohmann::json& body);

}  // namespace cueaudit
