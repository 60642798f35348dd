#pragma once

// Client for OpenAI-compatible chat-completion endpoints.
//
// Define CPPHTTPLIB_OPENSSL_SUPPORT (and link OpenSSL) before including this
// header to reach https endpoints.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <optional>
#include <regex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cotsup/core.hpp"
#include "cotsup/prompt.hpp"

namespace cotsup {

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_name = "gpt-4o";
  std::string api_key_ref = "OPENAI_API_KEY";  // environment variable holding the key
  double timeout_s = 60.0;
  int max_in_flight = 4;
  int max_retries = 3;
  int backoff_initial_ms = 500;
  int backoff_cap_ms = 8000;
  double temperature = 0.0;
};

inline void validate_endpoint_config(const EndpointConfig& cfg) {
  if (cfg.base_url.empty()) throw Error(ErrorCode::ConfigError, "base_url is empty");
  if (!(cfg.timeout_s > 0)) throw Error(ErrorCode::ConfigError, "timeout_s must be positive");
  if (cfg.max_in_flight < 1) throw Error(ErrorCode::ConfigError, "max_in_flight must be positive");
  if (cfg.max_retries < 0) throw Error(ErrorCode::ConfigError, "max_retries must be >= 0");
  if (cfg.backoff_initial_ms < 0 || cfg.backoff_cap_ms < cfg.backoff_initial_ms) {
    throw Error(ErrorCode::ConfigError, "backoff needs 0 <= initial <= cap");
  }
}

enum class CallStatus { Ok, Timeout, HttpError, MalformedResponse };

inline std::string_view to_string(CallStatus s) {
  switch (s) {
    case CallStatus::Ok: return "Ok";
    case CallStatus::Timeout: return "Timeout";
    case CallStatus::HttpError: return "HttpError";
    case CallStatus::MalformedResponse: return "MalformedResponse";
  }
  return "?";
}

struct CallOutcome {
  CallStatus status = CallStatus::Ok;
  std::string text;     // assistant content when Ok
  int http_status = 0;  // last status seen; 0 when no response arrived
  int attempts = 0;
  std::string detail;

  bool ok() const { return status == CallStatus::Ok; }

  // Short error text for run records; empty when Ok.
  std::string error_text() const {
    if (ok()) return {};
    std::string s(to_string(status));
    if (status == CallStatus::HttpError) s += "(" + std::to_string(http_status) + ")";
    if (!detail.empty()) s += ": " + detail;
    return s;
  }
};

namespace detail {

struct EndpointUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // request path for chat completions
};

inline EndpointUrl split_endpoint_url(const std::string& base_url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(base_url, m, re)) throw Error(ErrorCode::ConfigError, "bad base_url '" + base_url + "'");
  std::string path = m[2].matched ? m[2].str() : "";
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {m[1].str(), path + "/chat/completions"};
}

inline std::optional<std::string> assistant_content(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) return std::nullopt;
  const auto& content = first["message"].find("content");
  if (content == first["message"].end() || !content->is_string()) return std::nullopt;
  return content->get<std::string>();
}

inline bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace detail

inline nlohmann::ordered_json chat_request_body(const PromptBundle& bundle, const EndpointConfig& cfg) {
  return {{"model", cfg.model_name},
          {"messages",
           nlohmann::ordered_json::array({{{"role", "system"}, {"content", bundle.system_text}},
                                          {{"role", "user"}, {"content", bundle.user_text}}})},
          {"temperature", cfg.temperature}};
}

class EndpointClient {
 public:
  explicit EndpointClient(EndpointConfig cfg)
      : cfg_(validated(std::move(cfg))), url_(detail::split_endpoint_url(cfg_.base_url)), slots_(cfg_.max_in_flight) {}

  const EndpointConfig& config() const { return cfg_; }

  // Blocks while max_in_flight requests are already running.
  CallOutcome complete(const PromptBundle& bundle) {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    return complete_unbounded(bundle);
  }

  // Results are returned in input order; requests run concurrently.
  std::vector<CallOutcome> complete_all(const std::vector<PromptBundle>& bundles) {
    std::vector<CallOutcome> out(bundles.size());
    std::atomic<std::size_t> next{0};
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg_.max_in_flight), bundles.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < bundles.size(); i = next++) out[i] = complete(bundles[i]);
      });
    }
    for (auto& t : pool) t.join();
    return out;
  }

 private:
  CallOutcome complete_unbounded(const PromptBundle& bundle) {
    httplib::Client client(url_.origin);
    const auto secs = static_cast<time_t>(cfg_.timeout_s);
    const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!cfg_.api_key_ref.empty()) {
      if (const char* key = std::getenv(cfg_.api_key_ref.c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }
    const std::string body = chat_request_body(bundle, cfg_).dump();

    CallOutcome outcome;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(backoff(attempt));
      outcome = CallOutcome{};
      outcome.attempts = attempt + 1;
      auto res = client.Post(url_.path, headers, body, "application/json");
      if (!res) {
        const auto err = res.error();
        outcome.status = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout
                             ? CallStatus::Timeout
                             : CallStatus::HttpError;
        outcome.detail = httplib::to_string(err);
        continue;
      }
      outcome.http_status = res->status;
      if (res->status != 200) {
        outcome.status = CallStatus::HttpError;
        if (detail::retryable_status(res->status)) continue;
        return outcome;
      }
      if (auto text = detail::assistant_content(res->body)) {
        outcome.text = std::move(*text);
        return outcome;
      }
      outcome.status = CallStatus::MalformedResponse;
      outcome.detail = "response has no choices[0].message.content";
      return outcome;
    }
    return outcome;
  }

  static EndpointConfig validated(EndpointConfig cfg) {
    validate_endpoint_config(cfg);
    return cfg;
  }

  std::chrono::milliseconds backoff(int attempt) const {
    long long ms = cfg_.backoff_initial_ms;
    for (int i = 1; i < attempt && ms < cfg_.backoff_cap_ms; ++i) ms *= 2;
    return std::chrono::milliseconds(std::min<long long>(ms, cfg_.backoff_cap_ms));
  }

  EndpointConfig cfg_;
  detail::EndpointUrl url_;
  std::counting_semaphore<> slots_;
};

inline CallOutcome http_complete(const PromptBundle& bundle, const EndpointConfig& cfg) {
  return EndpointClient(cfg).complete(bundle);
}

}  // namespace cotsup
