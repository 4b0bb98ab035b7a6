// Copyright 2026 The srdet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef SRDET_TRANSPORT_HPP_
#define SRDET_TRANSPORT_HPP_

// Newline-delimited channels to external services, selected by URI:
//   exec:<shell command>   child process, requests on its stdin
//   tcp:<host>:<port>      plain TCP connection

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <string>
#include <string_view>

#include "srdet/error.hpp"

namespace srdet {

class LineChannel {
 public:
  virtual ~LineChannel() = default;
  /// Sends `line` followed by '\n'. `line` must not contain a newline.
  virtual void send_line(std::string_view line) = 0;
  /// Blocks until a full line arrives; the newline is stripped.
  virtual std::string recv_line() = 0;
};

namespace detail {

inline std::string errno_text() { return std::strerror(errno); }

// Buffered line reader over a file descriptor with a per-read deadline.
class FdLineReader {
 public:
  FdLineReader(int fd, int timeout_ms) : fd_(fd), timeout_ms_(timeout_ms) {}

  std::string read_line(std::string_view peer) {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(timeout_ms_);
    for (;;) {
      if (auto pos = buf_.find('\n'); pos != std::string::npos) {
        std::string line = buf_.substr(0, pos);
        buf_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
      if (left <= 0) {
        throw ProtocolError("timed out waiting for " + std::string(peer));
      }
      pollfd pfd{fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("poll failed: " + errno_text());
      }
      if (rc == 0) continue;
      char chunk[65536];
      const ssize_t n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw ProtocolError("read from " + std::string(peer) +
                            " failed: " + errno_text());
      }
      if (n == 0) {
        throw ProtocolError(std::string(peer) + " closed the connection");
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  int timeout_ms_;
  std::string buf_;
};

inline void write_all(int fd, std::string_view data, bool is_socket,
                      std::string_view peer) {
  while (!data.empty()) {
    const ssize_t n = is_socket ? ::send(fd, data.data(), data.size(), MSG_NOSIGNAL)
                                : ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("write to " + std::string(peer) +
                          " failed: " + errno_text());
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace detail

/// Runs `/bin/sh -c command` with pipes on stdin/stdout. The child's stderr
/// is inherited. SIGPIPE is ignored process-wide once the first channel is
/// created so a dying child surfaces as a write error.
class ProcessChannel : public LineChannel {
 public:
  ProcessChannel(const std::string& command, int timeout_ms)
      : command_(command), reader_(-1, timeout_ms) {
    static const bool sigpipe_ignored = [] {
      ::signal(SIGPIPE, SIG_IGN);
      return true;
    }();
    (void)sigpipe_ignored;
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw IoError("pipe failed: " + detail::errno_text());
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw IoError("pipe failed: " + detail::errno_text());
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw IoError("fork failed: " + detail::errno_text());
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    ::fcntl(in_fd_, F_SETFD, FD_CLOEXEC);
    ::fcntl(out_fd_, F_SETFD, FD_CLOEXEC);
    reader_ = detail::FdLineReader(out_fd_, timeout_ms);
  }

  ProcessChannel(const ProcessChannel&) = delete;
  ProcessChannel& operator=(const ProcessChannel&) = delete;

  ~ProcessChannel() override {
    if (in_fd_ >= 0) ::close(in_fd_);
    if (out_fd_ >= 0) ::close(out_fd_);
    if (pid_ > 0) {
      int status = 0;
      // Closing stdin asks the child to exit; give it a moment.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

  void send_line(std::string_view line) override {
    std::string msg(line);
    msg += '\n';
    detail::write_all(in_fd_, msg, false, peer());
  }

  std::string recv_line() override { return reader_.read_line(peer()); }

 private:
  std::string peer() const { return "process '" + command_ + "'"; }

  std::string command_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  detail::FdLineReader reader_;
};

class TcpChannel : public LineChannel {
 public:
  TcpChannel(const std::string& host, const std::string& port, int timeout_ms)
      : peer_("tcp:" + host + ":" + port), reader_(-1, timeout_ms) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
      throw IoError("cannot resolve " + peer_ + ": " + ::gai_strerror(rc));
    }
    std::string last_error = "no addresses";
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC,
                              ai->ai_protocol);
      if (fd < 0) {
        last_error = detail::errno_text();
        continue;
      }
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        fd_ = fd;
        break;
      }
      last_error = detail::errno_text();
      ::close(fd);
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw IoError("cannot connect to " + peer_ + ": " + last_error);
    reader_ = detail::FdLineReader(fd_, timeout_ms);
  }

  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void send_line(std::string_view line) override {
    std::string msg(line);
    msg += '\n';
    detail::write_all(fd_, msg, true, peer_);
  }

  std::string recv_line() override { return reader_.read_line(peer_); }

 private:
  std::string peer_;
  int fd_ = -1;
  detail::FdLineReader reader_;
};

/// Opens a channel for an `exec:` or `tcp:` URI.
inline std::unique_ptr<LineChannel> open_channel(std::string_view uri,
                                                 int timeout_ms) {
  if (uri.starts_with("exec:")) {
    std::string cmd(uri.substr(5));
    if (cmd.empty()) throw ConfigError("empty command in backend URI");
    return std::make_unique<ProcessChannel>(cmd, timeout_ms);
  }
  if (uri.starts_with("tcp:")) {
    const std::string_view rest = uri.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == rest.size()) {
      throw ConfigError("tcp URI must be tcp:<host>:<port>, got " + std::string(uri));
    }
    return std::make_unique<TcpChannel>(std::string(rest.substr(0, colon)),
                                        std::string(rest.substr(colon + 1)),
                                        timeout_ms);
  }
  throw ConfigError("unsupported backend URI: " + std::string(uri));
}

}  // namespace srdet

#endif  // SRDET_TRANSPORT_HPP_
