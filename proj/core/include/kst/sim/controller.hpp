#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "kst/kin/kinematics.hpp"
#include "kst/motion/planners.hpp"
#include "kst/protocol/frame.hpp"

namespace kst::sim {

enum class Mode { idle, executing, direct_servo, hand_guiding };
enum class Led { off, on, flicker };
enum class Button { white, green };
enum class Edge { release, press };

const char* mode_name(Mode m);

/// Output pins {1,2,11,12} and input pins {3,4,10,13,16} of the media flange.
inline constexpr std::array<int, 4> kOutputPins = {1, 2, 11, 12};
inline constexpr std::array<int, 5> kInputPins = {3, 4, 10, 13, 16};

struct RobotState {
  Mode mode = Mode::idle;
  kin::JointVector q{};
  std::array<double, kin::kNumJoints> qd{};  // rad/s, last tick
  kin::Wrench external_wrench;               // base frame, acting at the EEF
  std::map<int, bool> pins_out;
  std::map<int, bool> pins_in;

  bool led_blue = false;  // user-commanded level
  bool flicker = false;   // green-hold indication; overrides led_blue while set
  Led led() const { return flicker ? Led::flicker : (led_blue ? Led::on : Led::off); }

  // hand-guiding sub-state
  bool white_pressed = false;
  bool green_pressed = false;
  std::int64_t green_press_tick = -1;
  bool flicker_latched = false;      // flicker fired during the current hold
  bool guided_this_session = false;  // white was pressed since startHandGuiding

  std::array<double, 6> eef_register{};  // sendEEFPositions storage
  std::int64_t tick_count = 0;
};

/// The controller core behind the TCP server: owns RobotState, executes
/// trajectories on a fixed 5 ms tick, tracks streamed servo targets and the
/// hand-guiding button protocol. Single-threaded by contract; the server's
/// tick thread is the only caller.
class SimController {
 public:
  struct Options {
    bool virtual_time = false;  // motion commands run their ticks inline
    double dt = motion::kServerDt;
    double default_override = 0.25;  // home/transport moves
  };

  struct Outcome {
    std::optional<protocol::Response> response;  // empty for fire-and-forget / deferred
    bool deferred = false;   // completion arrives through the response sink
    bool close_conn = false; // bye
    bool shutdown = false;   // net_turnOffServer
  };

  using ResponseSink = std::function<void(const protocol::Response&)>;
  using ReportSink = std::function<void(const protocol::WireFrame&)>;
  using StateSink = std::function<void(const RobotState&, const kin::CartesianPose&)>;

  explicit SimController(kin::RobotGeometry geometry, Options opt = {});

  /// Deferred motion completions (wall-clock mode).
  void set_response_sink(ResponseSink sink) { response_sink_ = std::move(sink); }
  /// Unsolicited control-channel reports: teachPoint, servoReport,
  /// handGuidingEnded, doubleHit.
  void set_report_sink(ReportSink sink) { report_sink_ = std::move(sink); }
  /// Fired once per tick with the post-tick state and EEF pose.
  void set_state_sink(StateSink sink) { state_sink_ = std::move(sink); }

  void tick();
  Outcome handle_command(const protocol::WireFrame& frame);

  // Simulated-world inputs (wired to the inject* commands and used directly
  // by tests).
  void inject_guide_pose(const kin::JointVector& q);
  void inject_button(Button b, Edge e);
  void inject_wrench(const kin::Wrench& w);
  void inject_pin(int pin, bool level);
  void watch_double_hit(bool enable);

  /// Streaming/hand-guiding revert to IDLE when the control client vanishes;
  /// a running trajectory finishes on its own.
  void on_control_disconnect();

  const RobotState& state() const { return state_; }
  const kin::RobotGeometry& geometry() const { return geometry_; }
  const Options& options() const { return opt_; }
  double time_s() const { return static_cast<double>(state_.tick_count) * opt_.dt; }
  kin::CartesianPose eef_pose() const;

 private:
  using Handler = std::function<Outcome(const protocol::WireFrame&)>;

  void register_handlers();
  Outcome ok(const protocol::WireFrame& f, std::vector<double> payload = {}) const;
  static Outcome fail(const protocol::WireFrame& f, Errc code);
  Outcome start_trajectory(motion::JointTrajectory traj, const protocol::WireFrame& f);
  Outcome run_cartesian(const protocol::WireFrame& f, const kin::CartesianPose& goal, double v);
  motion::JointTrajectory resolve_path(const motion::CartesianPath& path) const;
  void emit_report(const std::string& tag, std::vector<double> args);
  void finish_motion();

  kin::RobotGeometry geometry_;
  Options opt_;
  RobotState state_;
  std::map<std::string, Handler> handlers_;

  motion::JointTrajectory trajectory_;
  std::size_t exec_index_ = 0;
  std::optional<std::uint64_t> pending_motion_seq_;

  std::optional<kin::JointVector> servo_target_;  // coalescing one-slot mailbox
  std::uint64_t servo_frames_received_ = 0;

  std::optional<kin::JointVector> guide_target_;

  bool double_hit_armed_ = false;
  bool double_hit_prev_above_ = false;
  double double_hit_last_edge_s_ = -1;

  std::uint64_t report_seq_ = 0;
  ResponseSink response_sink_;
  ReportSink report_sink_;
  StateSink state_sink_;
};

}  // namespace kst::sim
