#include "kst/client/connection.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace kst::client {

namespace {

int connect_with_timeout(const std::string& host, std::uint16_t port,
                         std::chrono::milliseconds timeout) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw KstError(Errc::connect_failed, "socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw KstError(Errc::connect_failed, "bad host address: " + host);
  }
  int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  if (rc != 0 && errno == EINPROGRESS) {
    pollfd pfd{fd, POLLOUT, 0};
    rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc == 1) {
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
    } else {
      rc = -1;
    }
  }
  if (rc != 0) {
    ::close(fd);
    throw KstError(Errc::connect_failed,
                   "cannot connect to " + host + ":" + std::to_string(port));
  }
  ::fcntl(fd, F_SETFL, flags);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace

Connection::Connection(Connection&& other) noexcept { *this = std::move(other); }

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
    next_seq_ = other.next_seq_;
    protocol_version_ = other.protocol_version_;
    server_virtual_time_ = other.server_virtual_time_;
    streaming_ = other.streaming_;
    rxbuf_ = std::move(other.rxbuf_);
    reports_ = std::move(other.reports_);
    geometry_ = std::move(other.geometry_);
  }
  return *this;
}

Connection::~Connection() { close(); }

void Connection::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

Connection Connection::open(const std::string& host, std::uint16_t port,
                            std::chrono::milliseconds connect_timeout) {
  Connection conn;
  conn.fd_ = connect_with_timeout(host, port, connect_timeout);
  protocol::Response hello = conn.request("hello", {}, 3000ms);
  if (hello.payload.empty() ||
      static_cast<int>(hello.payload[0]) != protocol::kProtocolVersion) {
    conn.close();
    throw KstError(Errc::version_mismatch, "server speaks an unsupported protocol version");
  }
  conn.protocol_version_ = static_cast<int>(hello.payload[0]);
  conn.server_virtual_time_ = hello.payload.size() > 1 && hello.payload[1] == 1.0;
  return conn;
}

std::string Connection::read_line(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    std::size_t nl = rxbuf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = rxbuf_.substr(0, nl + 1);
      rxbuf_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw KstError(Errc::timeout, "timed out waiting for server reply");
    pollfd pfd{fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc == 0) throw KstError(Errc::timeout, "timed out waiting for server reply");
    if (rc < 0) throw KstError(Errc::io, "poll() failed");
    char chunk[65536];
    ssize_t n = ::read(fd_, chunk, sizeof chunk);
    if (n <= 0) {
      close();
      throw KstError(Errc::disconnected, "server closed the connection");
    }
    rxbuf_.append(chunk, static_cast<std::size_t>(n));
  }
}

protocol::Response Connection::request(const std::string& tag, std::vector<double> args,
                                       std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw KstError(Errc::disconnected, "connection is closed");
  const std::uint64_t seq = ++next_seq_;
  const std::string line = protocol::encode_frame({seq, tag, std::move(args)});
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t n = ::write(fd_, line.data() + off, line.size() - off);
    if (n <= 0) {
      close();
      throw KstError(Errc::disconnected, "server closed the connection");
    }
    off += static_cast<std::size_t>(n);
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const std::string reply = read_line(deadline);
    if (protocol::is_response_line(reply)) {
      protocol::Response r = protocol::decode_response(reply);
      if (r.seq != seq)
        throw KstError(Errc::protocol, "response sequence mismatch (lockstep violated)");
      if (r.status == protocol::Status::err)
        throw KstError(errc_from_wire(r.err_code), tag + " failed: " + r.err_code);
      return r;
    }
    reports_.push_back(protocol::decode_frame(reply));
  }
}

void Connection::send_frame(const std::string& tag, std::vector<double> args) {
  if (fd_ < 0) throw KstError(Errc::disconnected, "connection is closed");
  const std::string line = protocol::encode_frame({++next_seq_, tag, std::move(args)});
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t n = ::write(fd_, line.data() + off, line.size() - off);
    if (n <= 0) {
      close();
      throw KstError(Errc::disconnected, "server closed the connection");
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<protocol::WireFrame> Connection::poll_report(std::chrono::milliseconds timeout) {
  if (!reports_.empty()) {
    protocol::WireFrame f = std::move(reports_.front());
    reports_.pop_front();
    return f;
  }
  if (fd_ < 0) throw KstError(Errc::disconnected, "connection is closed");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  try {
    const std::string line = read_line(deadline);
    if (protocol::is_response_line(line))
      throw KstError(Errc::protocol, "unexpected response while polling for reports");
    return protocol::decode_frame(line);
  } catch (const KstError& e) {
    if (e.code() == Errc::timeout) return std::nullopt;
    throw;
  }
}

}  // namespace kst::client
