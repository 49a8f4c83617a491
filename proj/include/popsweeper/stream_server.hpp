// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "popsweeper/engine.hpp"
#include "popsweeper/wire_protocol.hpp"

namespace popsweeper {

struct ListenAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

// "HOST:PORT"; throws InvalidArgument.
ListenAddress parse_listen_address(std::string_view text);

// Answers one request payload. Never throws: every failure becomes a
// continue response carrying a structured error.
std::string handle_request(const Engine& engine, SessionRegistry& sessions,
                           std::span<const std::uint8_t> payload);

// TCP server for the frame-stream protocol, one thread per connection.
// Sessions are keyed by the header's session id and may span connections.
class StreamServer {
 public:
  StreamServer(const Engine& engine, ListenAddress address,
               SessionRegistry::SinkFactory sink_factory = {});
  ~StreamServer();

  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  // Binds and starts accepting; returns the bound port. Throws BindFailure.
  std::uint16_t start();
  // Blocks until stop() is called from another thread.
  void wait();
  void stop();

  SessionRegistry& sessions() noexcept { return sessions_; }

 private:
  void accept_loop();
  void serve_connection(int fd);

  const Engine& engine_;
  ListenAddress address_;
  SessionRegistry sessions_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex connections_mutex_;
  std::vector<int> connection_fds_;
  std::vector<std::thread> connection_threads_;
};

// Blocking client used by tests and harness shims.
class StreamClient {
 public:
  StreamClient(const std::string& host, std::uint16_t port);
  ~StreamClient();

  StreamClient(const StreamClient&) = delete;
  StreamClient& operator=(const StreamClient&) = delete;

  std::string send_frame(const RequestHeader& header, std::span<const std::uint8_t> image);
  // Sends an arbitrary payload (for protocol tests) and returns the response.
  std::string send_payload(std::span<const std::uint8_t> payload);

 private:
  int fd_ = -1;
};

}  // namespace popsweeper
