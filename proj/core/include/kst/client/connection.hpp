#pragma once

#include <chrono>
#include <deque>
#include <optional>
#include <string>

#include "kst/kin/geometry.hpp"
#include "kst/protocol/frame.hpp"

namespace kst::client {

using namespace std::chrono_literals;

/// Client side of one TCP link to the controller. Strict request/response
/// lockstep: at most one synchronous request in flight, seq strictly
/// increasing. Unsolicited report frames read while waiting for a response
/// are stashed and retrievable through poll_report().
class Connection {
 public:
  Connection() = default;
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  /// Opens the socket and runs the hello handshake.
  static Connection open(const std::string& host, std::uint16_t port,
                         std::chrono::milliseconds connect_timeout = 3000ms);

  bool connected() const { return fd_ >= 0; }
  void close();

  int protocol_version() const { return protocol_version_; }
  /// True when the server runs on the virtual clock (advanced by clockStep).
  bool server_virtual_time() const { return server_virtual_time_; }

  /// Joint limits used for local pre-validation of streamed targets.
  const kin::RobotGeometry& geometry() const { return geometry_; }
  void set_geometry(kin::RobotGeometry g) { geometry_ = std::move(g); }

  /// Sends a frame and blocks for its response; ERR responses are thrown as
  /// KstError with the mapped code.
  protocol::Response request(const std::string& tag, std::vector<double> args = {},
                             std::chrono::milliseconds timeout = 10s);
  /// Fire-and-forget frame (direct-servo streaming).
  void send_frame(const std::string& tag, std::vector<double> args);

  /// Next unsolicited report, waiting up to `timeout`.
  std::optional<protocol::WireFrame> poll_report(std::chrono::milliseconds timeout);
  void clear_reports() { reports_.clear(); }

  /// Direct-servo streaming flag mirrored client-side; maintained by
  /// realTime_startDirectServoJoints / realTime_stopDirectServoJoints.
  bool streaming() const { return streaming_; }
  void set_streaming(bool on) { streaming_ = on; }

 private:
  std::string read_line(std::chrono::steady_clock::time_point deadline);

  int fd_ = -1;
  std::uint64_t next_seq_ = 0;
  int protocol_version_ = 0;
  bool server_virtual_time_ = false;
  bool streaming_ = false;
  std::string rxbuf_;
  std::deque<protocol::WireFrame> reports_;
  kin::RobotGeometry geometry_ = kin::RobotGeometry::iiwa7_r800();
};

}  // namespace kst::client
