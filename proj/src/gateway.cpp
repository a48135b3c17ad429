#include "cueaudit/gateway.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "cueaudit/log.hpp"
#include "cueaudit/text.hpp"

namespace cueaudit {

std::string_view to_string(FinishReason f) {
  switch (f) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "error";
}

FinishReason finish_reason_from_string(std::string_view s) {
  if (s == "stop") return FinishReason::stop;
  if (s == "length") return FinishReason::length;
  if (s == "error") return FinishReason::error;
  throw DecodeError("unknown finish reason: " + std::string(s));
}

nlohmann::json to_json(const Completion& c) {
  nlohmann::json j{{"text", c.text}, {"finish_reason", to_string(c.finish_reason)}};
  j["token_logprobs"] = c.token_logprobs ? nlohmann::json(*c.token_logprobs) : nlohmann::json(nullptr);
  if (!c.error.empty()) j["error"] = c.error;
  return j;
}

Completion completion_from_json(const nlohmann::json& j) {
  Completion c;
  c.text = j.at("text").get<std::string>();
  c.finish_reason = finish_reason_from_string(j.at("finish_reason").get<std::string>());
  if (j.contains("token_logprobs") && !j["token_logprobs"].is_null())
    c.token_logprobs = j["token_logprobs"].get<std::vector<double>>();
  c.error = j.value("error", "");
  return c;
}

void DecodingConfig::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
}

DecodingConfig decoding_for(const Job& job, double temperature) {
  DecodingConfig cfg{temperature, max_new_tokens(job)};
  cfg.validate();
  return cfg;
}

std::optional<double> perplexity(const Completion& c) {
  if (!c.token_logprobs || c.token_logprobs->empty()) return std::nullopt;
  double sum = 0.0;
  for (double lp : *c.token_logprobs) sum += lp;
  return std::exp(-sum / static_cast<double>(c.token_logprobs->size()));
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  std::ifstream in(*path_);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      entries_[j.at("key").get<std::string>()] = completion_from_json(j.at("completion"));
    } catch (const std::exception& e) {
      // A torn final line from an interrupted run is expected; skip it.
      log::warn("cache " + path_->string() + ": line " + std::to_string(lineno) + " skipped: " + e.what());
    }
  }
  out_.open(*path_, std::ios::app);
  if (!out_) throw LoadError("cannot open cache for append: " + path_->string());
}

std::optional<Completion> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& key, const Completion& c) {
  std::unique_lock lock(mutex_);
  if (!entries_.emplace(key, c).second) return;
  if (out_.is_open()) {
    out_ << nlohmann::json{{"key", key}, {"completion", to_json(c)}}.dump() << '\n';
    out_.flush();
  }
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::string cache_key(const std::string& backend_id, const Job& job, const DecodingConfig& cfg) {
  return backend_id + "|" + hex64(content_hash(job)) + "|t=" + format_number(cfg.temperature) +
         "|n=" + std::to_string(cfg.max_new_tokens);
}

Gateway::Gateway(Backend& backend, ResponseCache* cache, GatewayOptions options)
    : backend_(backend), cache_(cache), options_(options) {
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  if (options_.max_attempts < 1) options_.max_attempts = 1;
}

Completion Gateway::complete(const Job& job, const DecodingConfig& cfg) {
  cfg.validate();
  ++requests_;
  const std::string key = cache_key(backend_.id(), job, cfg);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      return *hit;
    }
  }
  std::string last_error;
  int delay = options_.backoff_ms;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    try {
      Completion c = backend_.complete(job, cfg);
      if (cache_ && c.finish_reason != FinishReason::error) cache_->put(key, c);
      return c;
    } catch (const TransportError& e) {
      last_error = e.what();
      if (attempt < options_.max_attempts) {
        ++retries_;
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        delay *= 2;
      }
    } catch (const DecodeError& e) {
      last_error = std::string("decode error: ") + e.what();
      break;
    }
  }
  ++failures_;
  log::warn("job " + hex64(content_hash(job)) + " failed: " + last_error);
  Completion failed;
  failed.finish_reason = FinishReason::error;
  failed.error = last_error;
  return failed;
}

std::vector<Completion> Gateway::complete_all(const std::vector<Job>& jobs, double temperature) {
  std::vector<Completion> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      out[i] = complete(jobs[i], decoding_for(jobs[i], temperature));
    }
  };
  const std::size_t n_threads = std::min(options_.max_in_flight, std::max<std::size_t>(jobs.size(), 1));
  if (n_threads <= 1) {
    worker();
    return out;
  }
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return out;
}

GatewayStats Gateway::stats() const {
  return GatewayStats{requests_.load(), cache_hits_.load(), retries_.load(), failures_.load()};
}

}  // namespace cueaudit
