#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "kst/kin/geometry.hpp"
#include "kst/motion/trapezoid.hpp"

namespace kst::sim {

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  std::uint16_t control_port = 30001;  // 0 picks an ephemeral port
  std::uint16_t side_port = 30002;
  bool virtual_time = false;
  double dt = motion::kServerDt;
  std::string trace_path;  // per-tick JSONL state log when nonempty
  double default_override = 0.25;
};

/// TCP front end around SimController: one control connection plus one
/// side-channel connection, both speaking the LF-delimited frame grammar.
/// Only the internal tick thread touches robot state; connection readers
/// deposit decoded frames into a queue and writers drain per-connection
/// outboxes, so the tick loop never blocks on sockets.
class Server {
 public:
  Server(kin::RobotGeometry geometry, ServerOptions opt);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds both ports and spawns the service threads. Throws KstError(io)
  /// when a port cannot be bound.
  void start();
  /// Blocks until net_turnOffServer or request_stop().
  void wait();
  /// start() + wait().
  void run();
  /// Asynchronous shutdown (e.g. from a signal handler).
  void request_stop();

  std::uint16_t control_port() const;
  std::uint16_t side_port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kst::sim
