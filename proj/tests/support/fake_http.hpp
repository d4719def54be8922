#pragma once

// A loopback HTTP server whose replies are scripted per request, for
// exercising the real HTTP clients.

#include <deque>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace mmc::testing {

class FakeHttpServer {
 public:
  struct Reply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
  };
  struct Seen {
    std::string path;
    std::string body;
    std::string content_type;
    std::string authorization;
  };

  explicit FakeHttpServer(std::deque<Reply> replies) : replies_(std::move(replies)) {
    server_.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      seen_.push_back({req.path, req.body, req.get_header_value("Content-Type"),
                       req.get_header_value("Authorization")});
      if (replies_.empty()) {
        res.status = 500;
        res.set_content("{\"error\":\"no scripted reply\"}", "application/json");
        return;
      }
      Reply r = replies_.front();
      replies_.pop_front();
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeHttpServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  std::vector<Seen> seen() const {
    std::lock_guard lock(mu_);
    return seen_;
  }

  static std::string chat_reply(const std::string& content) {
    nlohmann::json j{{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}};
    return j.dump();
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::deque<Reply> replies_;
  std::vector<Seen> seen_;
};

}  // namespace mmc::testing
