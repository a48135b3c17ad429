#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "cueaudit/gateway.hpp"

namespace cueaudit {

nlohmann::json chat_request_body(const HttpBackendConfig& cfg, const Job& job, const DecodingConfig& dc) {
  nlohmann::json body{
      {"model", cfg.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", system_text(job)}},
                              {{"role", "user"}, {"content", user_text(job)}}})},
      {"temperature", dc.temperature},
      {"max_tokens", dc.max_new_tokens},
  };
  if (cfg.request_logprobs) body["logprobs"] = true;
  return body;
}

Completion decode_chat_response(const nlohmann::json& body) {
  try {
    const auto& choice = body.at("choices").at(0);
    Completion c;
    const auto& content = choice.at("message").at("content");
    c.text = content.is_null() ? std::string() : content.get<std::string>();
    const std::string reason = choice.value("finish_reason", "stop");
    c.finish_reason = reason == "length" ? FinishReason::length : FinishReason::stop;
    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
      std::vector<double> lps;
      for (const auto& tok : choice["logprobs"]["content"]) lps.push_back(std::min(0.0, tok.at("logprob").get<double>()));
      c.token_logprobs = std::move(lps);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed chat completion: ") + e.what());
  }
}

namespace {

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg_.base_url, m, url_re)) throw ConfigError("bad base_url: " + cfg_.base_url);
    origin_ = m[1];
    std::string prefix = m[2];
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/chat/completions";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (origin_.rfind("https", 0) == 0) throw ConfigError("built without TLS support; use an http:// endpoint");
#endif
    if (cfg_.model.empty()) throw ConfigError("http backend needs a model name");
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }

  std::string id() const override { return "http:" + origin_ + path_ + "#" + cfg_.model; }

  Completion complete(const Job& job, const DecodingConfig& dc) override {
    httplib::Client client(origin_);
    client.set_connection_timeout(cfg_.timeout_seconds);
    client.set_read_timeout(cfg_.timeout_seconds);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const auto res = client.Post(path_, headers, chat_request_body(cfg_, job, dc).dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
      throw TransportError("server returned " + std::to_string(res->status));
    if (res->status != 200) throw DecodeError("server returned " + std::to_string(res->status) + ": " + res->body);
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw DecodeError(std::string("response is not JSON: ") + e.what());
    }
    return decode_chat_response(body);
  }

 private:
  HttpBackendConfig cfg_;
  std::string origin_;
  std::string path_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(const HttpBackendConfig& cfg) {
  return std::make_unique<HttpBackend>(cfg);
}

}  // namespace cueaudit
