#pragma once

// Local chat-completions stub. The first path segment picks the behaviour:
//   /echo    returns the user message
//   /flaky   answers 429 to its first request, then echoes
//   /broken  returns 200 with a body lacking choices
//   /slow    sleeps longer than any test timeout, then echoes
//   /auth    returns the Authorization header it received
//   /busy    holds each request briefly and records peak concurrency
//   /teapot  answers 418

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace stub {

class Server {
 public:
  Server() {
    svr_.Post(R"(/(\w+)/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req.matches[1].str(), req, res);
    });
    port_ = svr_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }
  ~Server() {
    svr_.stop();
    thread_.join();
  }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::string url(const std::string& mode) const { return "http://127.0.0.1:" + std::to_string(port_) + "/" + mode; }
  int requests() const { return requests_; }
  int peak_in_flight() const { return peak_; }

 private:
  static std::string reply(const std::string& content) {
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
  }

  void handle(const std::string& mode, const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    int n = 0;
    {
      std::lock_guard lock(mu_);
      n = ++per_mode_[mode];
    }
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    const std::string user = body.is_discarded() ? "" : body["messages"][1]["content"].get<std::string>();
    if (mode == "flaky" && n == 1) {
      res.status = 429;
      return;
    }
    if (mode == "teapot") {
      res.status = 418;
      return;
    }
    if (mode == "broken") {
      res.set_content(R"({"id": "x", "object": "chat.completion"})", "application/json");
      return;
    }
    if (mode == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    if (mode == "busy") {
      const int now = ++in_flight_;
      int seen = peak_.load();
      while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(60));
      --in_flight_;
    }
    res.set_content(reply(mode == "auth" ? req.get_header_value("Authorization") : user), "application/json");
  }

  httplib::Server svr_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::map<std::string, int> per_mode_;
  std::atomic<int> requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
};

}  // namespace stub
