// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/stream_server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace popsweeper {

namespace {

bool read_exact(int fd, std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::recv(fd, data, size, 0);
    if (n == 0) return false;
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

bool write_all(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

enum class ReadResult { kOk, kClosed, kTooLarge };

ReadResult read_message(int fd, std::vector<std::uint8_t>& payload) {
  std::array<std::uint8_t, 4> prefix{};
  if (!read_exact(fd, prefix.data(), prefix.size())) return ReadResult::kClosed;
  const std::uint32_t length = decode_length(prefix);
  if (length > kMaxMessageBytes) return ReadResult::kTooLarge;
  payload.resize(length);
  if (!read_exact(fd, payload.data(), payload.size())) return ReadResult::kClosed;
  return ReadResult::kOk;
}

bool write_message(int fd, std::string_view payload) {
  const auto prefix = encode_length(static_cast<std::uint32_t>(payload.size()));
  return write_all(fd, prefix.data(), prefix.size()) &&
         write_all(fd, reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size());
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || result == nullptr) {
    throw Error(ErrorCode::kBindFailure, "cannot resolve host '" + host + "'");
  }
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(result->ai_addr);
  ::freeaddrinfo(result);
  addr.sin_port = htons(port);
  return addr;
}

}  // namespace

ListenAddress parse_listen_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == text.size()) {
    throw Error(ErrorCode::kInvalidArgument, "listen address must be HOST:PORT");
  }
  ListenAddress addr;
  addr.host = std::string(text.substr(0, colon));
  if (addr.host.empty()) addr.host = "0.0.0.0";
  try {
    const int port = std::stoi(std::string(text.substr(colon + 1)));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    addr.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in '" + std::string(text) + "'");
  }
  return addr;
}

std::string handle_request(const Engine& engine, SessionRegistry& sessions,
                           std::span<const std::uint8_t> payload) {
  try {
    const ParsedRequest request = split_request_payload(payload);
    const Frame frame = decode_request(request);
    auto session = sessions.get_or_create(request.header.session);
    std::lock_guard lock(session->mutex);
    return engine.handle_frame(session->context, frame).to_json();
  } catch (const Error& e) {
    return error_response_json(e.code(), e.what());
  } catch (const std::exception& e) {
    return error_response_json(ErrorCode::kProtocolError, e.what());
  }
}

StreamServer::StreamServer(const Engine& engine, ListenAddress address,
                           SessionRegistry::SinkFactory sink_factory)
    : engine_(engine), address_(std::move(address)), sessions_(std::move(sink_factory)) {}

StreamServer::~StreamServer() { stop(); }

std::uint16_t StreamServer::start() {
  const sockaddr_in addr = resolve(address_.host, address_.port);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::kBindFailure, std::strerror(errno));
  const int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorCode::kBindFailure,
                address_.host + ":" + std::to_string(address_.port) + ": " + reason);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  acceptor_ = std::thread([this] { accept_loop(); });
  return ntohs(bound.sin_port);
}

void StreamServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

void StreamServer::stop() {
  if (stopping_.exchange(true)) {
    wait();
    return;
  }
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  wait();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(connections_mutex_);
    for (int fd : connection_fds_) ::shutdown(fd, SHUT_RDWR);
    threads.swap(connection_threads_);
  }
  for (auto& t : threads) t.join();
}

void StreamServer::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    const int yes = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof(yes));
    std::lock_guard lock(connections_mutex_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    connection_fds_.push_back(fd);
    connection_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void StreamServer::serve_connection(int fd) {
  std::vector<std::uint8_t> payload;
  while (true) {
    const ReadResult r = read_message(fd, payload);
    if (r == ReadResult::kClosed) break;
    if (r == ReadResult::kTooLarge) {
      // The stream cannot be resynchronised after an oversized prefix.
      write_message(fd, error_response_json(ErrorCode::kProtocolError,
                                            "message exceeds size limit"));
      break;
    }
    if (!write_message(fd, handle_request(engine_, sessions_, payload))) break;
  }
  std::lock_guard lock(connections_mutex_);
  std::erase(connection_fds_, fd);
  ::close(fd);
}

StreamClient::StreamClient(const std::string& host, std::uint16_t port) {
  const sockaddr_in addr = resolve(host, port);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0 || ::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string reason = std::strerror(errno);
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::kIoError, "connect " + host + ":" + std::to_string(port) + ": " + reason);
  }
  const int yes = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof(yes));
}

StreamClient::~StreamClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::string StreamClient::send_frame(const RequestHeader& header,
                                     std::span<const std::uint8_t> image) {
  return send_payload(make_request_payload(header, image));
}

std::string StreamClient::send_payload(std::span<const std::uint8_t> payload) {
  const auto prefix = encode_length(static_cast<std::uint32_t>(payload.size()));
  if (!write_all(fd_, prefix.data(), prefix.size()) ||
      !write_all(fd_, payload.data(), payload.size())) {
    throw Error(ErrorCode::kIoError, "send failed");
  }
  std::vector<std::uint8_t> response;
  if (read_message(fd_, response) != ReadResult::kOk) {
    throw Error(ErrorCode::kIoError, "connection closed before response");
  }
  return std::string(response.begin(), response.end());
}

}  // namespace popsweeper
