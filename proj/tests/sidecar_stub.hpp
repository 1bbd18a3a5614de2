// Copyright 2026 The vidprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// In-process HTTP server replaying recorded protocol exchanges.

#include <arpa/inet.h>
#include <httplib.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <mutex>
#include <string>
#include <thread>

#include "vidprompt/vidprompt.hpp"

namespace vptest {

using vidprompt::json;

class ReplayServer {
 public:
  explicit ReplayServer(json exchanges) : exchanges_(std::move(exchanges)) {
    server_.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      requests_.fetch_add(1);
      {
        std::lock_guard lock(mutex_);
        last_auth_ = req.get_header_value("Authorization");
      }
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        res.status = 400;
        res.set_content(R"({"error":"malformed JSON"})", "application/json");
        return;
      }
      for (const auto& ex : exchanges_) {
        if (ex.at("path") == req.path && ex.at("request") == body) {
          res.status = ex.at("status").get<int>();
          res.set_content(ex.at("response").dump(), "application/json");
          return;
        }
      }
      res.status = 422;
      res.set_content(json{{"error", "no recorded exchange for " + req.path}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~ReplayServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::size_t requests() const { return requests_.load(); }
  std::string last_authorization() const {
    std::lock_guard lock(mutex_);
    return last_auth_;
  }

 private:
  json exchanges_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
  mutable std::mutex mutex_;
  std::string last_auth_;
};

/// A local port with nothing listening on it.
inline int closed_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace vptest
