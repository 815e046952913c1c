#pragma once

#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "mgsim/protocol.hpp"

namespace mgsim::server {

class ServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// "host:port"; the port may be 0 to let the OS pick one.
inline Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ServerError("expected host:port, got '" + text + "'");
  }
  Endpoint ep{text.substr(0, colon), 0};
  const auto port_text = text.substr(colon + 1);
  std::size_t used = 0;
  unsigned long port = 0;
  try {
    port = std::stoul(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port_text.size() || port > 65535) throw ServerError("invalid port '" + port_text + "'");
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

/// Serves one session over a pair of streams (stdin/stdout in the CLI) until
/// the client sends "done" or the input ends. Returns the session log.
inline protocol::SessionLog serve_stream(std::istream& in, std::ostream& out, std::shared_ptr<const Dataset> dataset,
                                         EnvironmentOptions options) {
  protocol::Session session(std::move(dataset), std::move(options));
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << session.handle(line) << '\n';
    out.flush();
  }
  return session.log();
}

namespace detail {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  ~Socket() { reset(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const auto n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace detail

/// Line-delimited JSON over TCP. Every connection gets its own Environment
/// built from the shared, read-only dataset.
class TcpServer {
 public:
  static constexpr std::size_t kMaxLineBytes = 16u << 20;

  TcpServer(std::shared_ptr<const Dataset> dataset, EnvironmentOptions options,
            std::optional<std::filesystem::path> log_dir = std::nullopt)
      : dataset_(std::move(dataset)), options_(std::move(options)), log_dir_(std::move(log_dir)) {
    if (!dataset_) throw std::invalid_argument("null dataset");
  }

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;
  ~TcpServer() { stop(); }

  /// Binds and listens. Returns the bound port (useful with port 0).
  std::uint16_t listen(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* found = nullptr;
    const auto port_text = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), port_text.c_str(), &hints, &found); rc != 0) {
      throw ServerError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);

    std::string last_error = "no usable address";
    for (auto* ai = found; ai; ai = ai->ai_next) {
      detail::Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
      if (!s.valid()) {
        last_error = std::strerror(errno);
        continue;
      }
      const int yes = 1;
      ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
      if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) != 0 || ::listen(s.fd(), 16) != 0) {
        last_error = std::strerror(errno);
        continue;
      }
      sockaddr_storage bound{};
      socklen_t len = sizeof bound;
      ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
      port_ = bound.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port)
                                          : ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
      listener_ = std::move(s);
      return port_;
    }
    throw ServerError("cannot listen on " + host + ":" + port_text + ": " + last_error);
  }

  std::uint16_t port() const { return port_; }

  /// Accept loop on a background thread.
  void start() {
    if (!listener_.valid()) throw ServerError("listen() must succeed before start()");
    accept_thread_ = std::thread([this] { run(); });
  }

  /// Blocking accept loop; returns after stop().
  void run() {
    if (!listener_.valid()) throw ServerError("listen() must succeed before run()");
    while (!stopping_) {
      pollfd p{listener_.fd(), POLLIN, 0};
      const int rc = ::poll(&p, 1, 100);
      if (rc <= 0) continue;
      const int fd = ::accept(listener_.fd(), nullptr, nullptr);
      if (fd < 0) continue;
      const auto index = accepted_++;
      std::lock_guard lock(mutex_);
      workers_.emplace_back([this, fd, index] { serve_connection(detail::Socket(fd), index); });
    }
  }

  void stop() {
    stopping_ = true;
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(mutex_);
      workers.swap(workers_);
    }
    for (auto& w : workers) {
      if (w.joinable()) w.join();
    }
    listener_.reset();
  }

  std::size_t connections_accepted() const { return accepted_; }

 private:
  void serve_connection(detail::Socket sock, std::size_t index) {
    protocol::Session session(dataset_, options_);
    std::string buffer;
    char chunk[4096];
    bool open = true;
    while (open && !stopping_ && !session.closed()) {
      pollfd p{sock.fd(), POLLIN, 0};
      const int rc = ::poll(&p, 1, 100);
      if (rc == 0) continue;
      if (rc < 0) {
        if (errno == EINTR) continue;
        break;
      }
      const auto n = ::recv(sock.fd(), chunk, sizeof chunk, 0);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        break;
      }
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t pos;
      while (open && !session.closed() && (pos = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, pos);
        buffer.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        open = detail::send_all(sock.fd(), session.handle(line) + '\n');
      }
      if (buffer.size() > kMaxLineBytes) {
        detail::send_all(sock.fd(), protocol::json{{"type", "error"},
                                                   {"id", nullptr},
                                                   {"payload", {{"message", "message exceeds size limit"}}}}
                                            .dump() +
                                        '\n');
        break;
      }
    }
    if (log_dir_) {
      std::ofstream out(*log_dir_ / ("session_" + std::to_string(index) + ".jsonl"));
      session.log().write(out);
    }
  }

  std::shared_ptr<const Dataset> dataset_;
  EnvironmentOptions options_;
  std::optional<std::filesystem::path> log_dir_;
  detail::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> accepted_{0};
  std::thread accept_thread_;
  std::mutex mutex_;
  std::vector<std::thread> workers_;
};

}  // namespace mgsim::server
