#include "kst/sim/controller.hpp"

#include <cmath>

#include "kst/kin/rotation.hpp"

namespace kst::sim {

namespace {

constexpr double kGreenHoldSeconds = 1.5;
constexpr int kServoReportEvery = 16;
constexpr std::uint64_t kMaxClockStep = 1'000'000;

kin::JointVector joints_from(const std::vector<double>& args, std::size_t offset = 0) {
  kin::JointVector q{};
  for (int i = 0; i < kin::kNumJoints; ++i) q[i] = args[offset + i];
  return q;
}

kin::CartesianPose pose_from(const std::vector<double>& args, std::size_t offset = 0) {
  return {args[offset + 0], args[offset + 1], args[offset + 2],
          args[offset + 3], args[offset + 4], args[offset + 5]};
}

bool is_flag(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::idle: return "IDLE";
    case Mode::executing: return "EXECUTING";
    case Mode::direct_servo: return "DIRECT_SERVO";
    case Mode::hand_guiding: return "HAND_GUIDING";
  }
  return "?";
}

SimController::SimController(kin::RobotGeometry geometry, Options opt)
    : geometry_(std::move(geometry)), opt_(opt) {
  geometry_.validate();
  state_.q = geometry_.home;
  for (int pin : kOutputPins) state_.pins_out[pin] = false;
  for (int pin : kInputPins) state_.pins_in[pin] = false;
  register_handlers();
}

kin::CartesianPose SimController::eef_pose() const {
  return kin::forward_kinematics(geometry_, state_.q);
}

SimController::Outcome SimController::ok(const protocol::WireFrame& f,
                                         std::vector<double> payload) const {
  Outcome out;
  out.response = protocol::Response{f.seq, protocol::Status::ok, std::move(payload), {}};
  return out;
}

SimController::Outcome SimController::fail(const protocol::WireFrame& f, Errc code) {
  Outcome out;
  out.response = protocol::Response{f.seq, protocol::Status::err, {},
                                    std::string(wire_error_code(code))};
  return out;
}

void SimController::emit_report(const std::string& tag, std::vector<double> args) {
  if (report_sink_) report_sink_(protocol::WireFrame{++report_seq_, tag, std::move(args)});
}

void SimController::finish_motion() {
  state_.mode = Mode::idle;
  if (pending_motion_seq_ && response_sink_)
    response_sink_(protocol::Response{*pending_motion_seq_, protocol::Status::ok, {}, {}});
  pending_motion_seq_.reset();
}

void SimController::tick() {
  ++state_.tick_count;
  const double dt = opt_.dt;
  const kin::JointVector prev = state_.q;

  switch (state_.mode) {
    case Mode::executing:
      ++exec_index_;
      state_.q = trajectory_.samples[exec_index_];
      if (exec_index_ + 1 >= trajectory_.samples.size()) finish_motion();
      break;
    case Mode::direct_servo:
      if (servo_target_) {
        for (int i = 0; i < kin::kNumJoints; ++i) {
          const double step_max = geometry_.qd_max[i] * dt;
          const double delta = (*servo_target_)[i] - state_.q[i];
          state_.q[i] += std::clamp(delta, -step_max, step_max);
          state_.q[i] = std::clamp(state_.q[i], geometry_.q_min[i], geometry_.q_max[i]);
        }
      }
      break;
    case Mode::hand_guiding:
      if (state_.white_pressed && guide_target_)
        state_.q = geometry_.clamp_to_limits(*guide_target_);
      break;
    case Mode::idle:
      break;
  }
  for (int i = 0; i < kin::kNumJoints; ++i) state_.qd[i] = (state_.q[i] - prev[i]) / dt;

  // green-button hold: flicker after 1.5 s, capture the pose if the robot
  // was actually hand-guided this session
  if (state_.mode == Mode::hand_guiding && state_.green_pressed && !state_.flicker_latched &&
      state_.green_press_tick >= 0) {
    const double held = static_cast<double>(state_.tick_count - state_.green_press_tick) * dt;
    if (held > kGreenHoldSeconds) {
      state_.flicker = true;
      state_.flicker_latched = true;
      if (state_.guided_this_session) {
        const kin::CartesianPose pose = eef_pose();
        emit_report("teachPoint",
                    {state_.q[0], state_.q[1], state_.q[2], state_.q[3], state_.q[4], state_.q[5],
                     state_.q[6], pose.x, pose.y, pose.z, pose.alpha, pose.beta, pose.gamma,
                     time_s()});
      }
    }
  }

  if (double_hit_armed_) {
    const bool above = state_.external_wrench.force.norm() > geometry_.double_hit_threshold_n;
    if (above && !double_hit_prev_above_) {
      const double now = time_s();
      if (double_hit_last_edge_s_ >= 0 &&
          now - double_hit_last_edge_s_ <= geometry_.double_hit_window_s) {
        emit_report("doubleHit", {now});
        double_hit_last_edge_s_ = -1;
      } else {
        double_hit_last_edge_s_ = now;
      }
    }
    double_hit_prev_above_ = above;
  }

  if (state_sink_) state_sink_(state_, eef_pose());
}

void SimController::inject_guide_pose(const kin::JointVector& q) {
  if (!geometry_.within_limits(q))
    throw KstError(Errc::bad_args, "guide pose outside joint limits");
  guide_target_ = q;
}

void SimController::inject_button(Button b, Edge e) {
  if (b == Button::white) {
    state_.white_pressed = e == Edge::press;
    if (state_.white_pressed && state_.mode == Mode::hand_guiding)
      state_.guided_this_session = true;
    return;
  }
  if (e == Edge::press) {
    if (!state_.green_pressed) {
      state_.green_pressed = true;
      state_.green_press_tick = state_.tick_count;
    }
    return;
  }
  state_.green_pressed = false;
  state_.green_press_tick = -1;
  if (state_.mode == Mode::hand_guiding && state_.flicker_latched) {
    // release after flicker terminates the session
    state_.mode = Mode::idle;
    state_.flicker = false;
    state_.flicker_latched = false;
    state_.guided_this_session = false;
    guide_target_.reset();
    emit_report("handGuidingEnded", {});
  }
}

void SimController::inject_wrench(const kin::Wrench& w) { state_.external_wrench = w; }

void SimController::inject_pin(int pin, bool level) {
  auto it = state_.pins_in.find(pin);
  if (it == state_.pins_in.end())
    throw KstError(Errc::bad_args, "pin " + std::to_string(pin) + " is not an input pin");
  it->second = level;
}

void SimController::watch_double_hit(bool enable) {
  double_hit_armed_ = enable;
  double_hit_prev_above_ = false;
  double_hit_last_edge_s_ = -1;
}

void SimController::on_control_disconnect() {
  pending_motion_seq_.reset();  // completion has nowhere to go
  if (state_.mode == Mode::direct_servo || state_.mode == Mode::hand_guiding) {
    state_.mode = Mode::idle;
    state_.flicker = false;
    state_.flicker_latched = false;
    state_.guided_this_session = false;
    guide_target_.reset();
    servo_target_.reset();
  }
  watch_double_hit(false);
}

SimController::Outcome SimController::start_trajectory(motion::JointTrajectory traj,
                                                       const protocol::WireFrame& f) {
  if (traj.samples.size() <= 1) return ok(f);  // zero-displacement move
  trajectory_ = std::move(traj);
  exec_index_ = 0;
  state_.mode = Mode::executing;
  if (opt_.virtual_time) {
    while (state_.mode == Mode::executing) tick();
    return ok(f);
  }
  pending_motion_seq_ = f.seq;
  Outcome out;
  out.deferred = true;
  return out;
}

motion::JointTrajectory SimController::resolve_path(const motion::CartesianPath& path) const {
  motion::JointTrajectory traj = motion::path_to_joint_trajectory(path, state_.q, geometry_);
  if (traj.dt > path.dt * (1.0 + 1e-9))
    throw KstError(Errc::limit, "commanded Cartesian speed exceeds joint speed limits");
  return traj;
}

SimController::Outcome SimController::run_cartesian(const protocol::WireFrame& f,
                                                    const kin::CartesianPose& goal, double v) {
  const kin::CartesianPose start = eef_pose();
  motion::CartesianPath path = motion::plan_line(start, goal, v, opt_.dt);
  try {
    return start_trajectory(resolve_path(path), f);
  } catch (const KstError& e) {
    if (e.code() != Errc::limit) throw;
    // too fast for the joints: retry once at the feasible speed
    motion::JointTrajectory probe = motion::path_to_joint_trajectory(path, state_.q, geometry_);
    path = motion::plan_line(start, goal, v * path.dt / probe.dt, opt_.dt);
    return start_trajectory(resolve_path(path), f);
  }
}

void SimController::register_handlers() {
  auto need = [](const protocol::WireFrame& f, std::size_t n) {
    if (f.args.size() != n)
      throw KstError(Errc::bad_args, f.tag + " expects " + std::to_string(n) + " arguments");
  };
  auto require_idle = [this](const protocol::WireFrame& f) {
    if (state_.mode != Mode::idle)
      throw KstError(Errc::bad_mode, f.tag + " requires IDLE mode");
  };

  // --- networking -----------------------------------------------------
  handlers_["hello"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    return ok(f, {static_cast<double>(protocol::kProtocolVersion),
                  opt_.virtual_time ? 1.0 : 0.0});
  };
  handlers_["bye"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    Outcome out = ok(f);
    out.close_conn = true;
    return out;
  };
  handlers_["net_turnOffServer"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    Outcome out = ok(f);
    out.shutdown = true;
    return out;
  };

  // --- point-to-point motion -------------------------------------------
  handlers_["movePTPJointSpace"] = [this, need, require_idle](const protocol::WireFrame& f) {
    need(f, 8);
    require_idle(f);
    return start_trajectory(
        motion::plan_joint_ptp(state_.q, joints_from(f.args), f.args[7], geometry_, opt_.dt), f);
  };
  handlers_["movePTPHomeJointSpace"] = [this, need, require_idle](const protocol::WireFrame& f) {
    need(f, 0);
    require_idle(f);
    return start_trajectory(
        motion::plan_joint_ptp(state_.q, geometry_.home, opt_.default_override, geometry_, opt_.dt),
        f);
  };
  handlers_["movePTPTransportPositionJointSpace"] =
      [this, need, require_idle](const protocol::WireFrame& f) {
        need(f, 0);
        require_idle(f);
        return start_trajectory(motion::plan_joint_ptp(state_.q, geometry_.transport,
                                                       opt_.default_override, geometry_, opt_.dt),
                                f);
      };
  handlers_["movePTPLineEEF"] = [this, need, require_idle](const protocol::WireFrame& f) {
    need(f, 7);
    require_idle(f);
    return run_cartesian(f, pose_from(f.args), f.args[6]);
  };
  handlers_["movePTPLineEefRelBase"] = [this, need, require_idle](const protocol::WireFrame& f) {
    need(f, 7);
    require_idle(f);
    const kin::CartesianPose delta = pose_from(f.args);
    const kin::Transform cur = kin::forward_transform(geometry_, state_.q);
    kin::Transform goal;
    goal.p = cur.p + Eigen::Vector3d{delta.x, delta.y, delta.z};
    goal.R = kin::angles_to_matrix(delta.alpha, delta.beta, delta.gamma) * cur.R;
    return run_cartesian(f, kin::transform_to_pose(goal), f.args[6]);
  };
  handlers_["movePTPLineEefRelEef"] = [this, need, require_idle](const protocol::WireFrame& f) {
    need(f, 7);
    require_idle(f);
    const kin::Transform cur = kin::forward_transform(geometry_, state_.q);
    const kin::Transform goal = cur * kin::pose_to_transform(pose_from(f.args));
    return run_cartesian(f, kin::transform_to_pose(goal), f.args[6]);
  };
  handlers_["movePTPCirc1OrientationInterpolation"] =
      [this, need, require_idle](const protocol::WireFrame& f) {
        need(f, 13);
        require_idle(f);
        const auto spec = motion::ArcSpec::two_frames_arc(pose_from(f.args, 0), pose_from(f.args, 6));
        motion::CartesianPath path = motion::plan_arc(eef_pose(), spec, f.args[12], opt_.dt);
        return start_trajectory(resolve_path(path), f);
      };
  auto arc_handler = [this, require_idle](const protocol::WireFrame& f,
                                          const motion::ArcSpec& spec, double v) {
    require_idle(f);
    motion::CartesianPath path = motion::plan_arc(eef_pose(), spec, v, opt_.dt);
    return start_trajectory(resolve_path(path), f);
  };
  handlers_["movePTPArc_AC"] = [need, arc_handler](const protocol::WireFrame& f) {
    need(f, 9);
    return arc_handler(f,
                       motion::ArcSpec::center_normal_arc({f.args[0], f.args[1], f.args[2]},
                                                          {f.args[3], f.args[4], f.args[5]},
                                                          f.args[6], f.args[7]),
                       f.args[8]);
  };
  auto plane_arc = [need, arc_handler](motion::ArcSpec::Kind kind) {
    return [need, arc_handler, kind](const protocol::WireFrame& f) {
      need(f, 6);
      return arc_handler(
          f, motion::ArcSpec::plane_arc(kind, f.args[0], f.args[1], f.args[2], f.args[3], f.args[4]),
          f.args[5]);
    };
  };
  handlers_["movePTPArcXY_AC"] = plane_arc(motion::ArcSpec::Kind::plane_xy);
  handlers_["movePTPArcXZ_AC"] = plane_arc(motion::ArcSpec::Kind::plane_xz);
  handlers_["movePTPArcYZ_AC"] = plane_arc(motion::ArcSpec::Kind::plane_yz);
  handlers_["realTime_moveOnPathInJointSpace"] =
      [this, require_idle](const protocol::WireFrame& f) {
        if (f.args.size() < 8 || (f.args.size() - 1) % kin::kNumJoints != 0)
          throw KstError(Errc::bad_args,
                         "realTime_moveOnPathInJointSpace expects override + N*7 angles");
        require_idle(f);
        std::vector<kin::JointVector> waypoints;
        for (std::size_t off = 1; off < f.args.size(); off += kin::kNumJoints)
          waypoints.push_back(joints_from(f.args, off));
        return start_trajectory(
            motion::plan_joint_waypoints(state_.q, waypoints, f.args[0], geometry_, opt_.dt), f);
      };

  // --- real-time control -------------------------------------------------
  handlers_["realTime_startDirectServoJoints"] =
      [this, need, require_idle](const protocol::WireFrame& f) {
        need(f, 0);
        require_idle(f);
        state_.mode = Mode::direct_servo;
        servo_target_.reset();
        servo_frames_received_ = 0;
        return ok(f);
      };
  handlers_["realTime_stopDirectServoJoints"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    if (state_.mode != Mode::direct_servo)
      throw KstError(Errc::bad_mode, "direct servo is not running");
    state_.mode = Mode::idle;
    servo_target_.reset();
    return ok(f);
  };
  handlers_["sendJointsPositions"] = [this, need](const protocol::WireFrame& f) {
    need(f, 7);
    if (state_.mode != Mode::direct_servo)
      throw KstError(Errc::bad_mode, "sendJointsPositions requires DIRECT_SERVO");
    servo_target_ = geometry_.clamp_to_limits(joints_from(f.args));
    if (++servo_frames_received_ % kServoReportEvery == 0)
      emit_report("servoReport", {state_.q.begin(), state_.q.end()});
    return Outcome{};  // fire-and-forget
  };
  handlers_["sendJointsPositionsF"] = [this, need](const protocol::WireFrame& f) {
    need(f, 6);
    if (state_.mode != Mode::direct_servo)
      throw KstError(Errc::bad_mode, "sendJointsPositionsF requires DIRECT_SERVO");
    // one damped IK step toward the streamed pose becomes the servo target
    servo_target_ = kin::ik_step(geometry_, pose_from(f.args), state_.q);
    if (++servo_frames_received_ % kServoReportEvery == 0)
      emit_report("servoReport", {state_.q.begin(), state_.q.end()});
    return Outcome{};
  };

  // --- setters -------------------------------------------------------------
  handlers_["setBlueOn"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    state_.led_blue = true;
    return ok(f);
  };
  handlers_["setBlueOff"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    state_.led_blue = false;
    return ok(f);
  };
  for (int pin : kOutputPins) {
    handlers_["setPin" + std::to_string(pin) + "On"] = [this, need, pin](const protocol::WireFrame& f) {
      need(f, 0);
      state_.pins_out[pin] = true;
      return ok(f);
    };
    handlers_["setPin" + std::to_string(pin) + "Off"] = [this, need, pin](const protocol::WireFrame& f) {
      need(f, 0);
      state_.pins_out[pin] = false;
      return ok(f);
    };
  }
  handlers_["sendEEFPositions"] = [this, need](const protocol::WireFrame& f) {
    need(f, 6);
    for (int i = 0; i < 6; ++i) state_.eef_register[i] = f.args[i];
    return ok(f);
  };
  handlers_["getStoredEEFPositions"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    return ok(f, {state_.eef_register.begin(), state_.eef_register.end()});
  };

  // --- getters --------------------------------------------------------------
  handlers_["getJointsPos"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    return ok(f, {state_.q.begin(), state_.q.end()});
  };
  handlers_["getEEFPos"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    const auto p = eef_pose();
    return ok(f, {p.x, p.y, p.z, p.alpha, p.beta, p.gamma});
  };
  handlers_["getEEFCartesianPosition"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    const auto p = eef_pose();
    return ok(f, {p.x, p.y, p.z});
  };
  handlers_["getEEFCartesianOrientation"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    const auto p = eef_pose();
    return ok(f, {p.alpha, p.beta, p.gamma});
  };
  handlers_["getEEF_Force"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    const kin::Transform t = kin::forward_transform(geometry_, state_.q);
    const Eigen::Vector3d fl = t.R.transpose() * state_.external_wrench.force;
    return ok(f, {fl.x(), fl.y(), fl.z()});
  };
  handlers_["getEEF_Moment"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    const kin::Transform t = kin::forward_transform(geometry_, state_.q);
    const Eigen::Vector3d m = t.R.transpose() * state_.external_wrench.moment;
    return ok(f, {m.x(), m.y(), m.z()});
  };
  handlers_["getJointsExternalTorques"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    const auto tau = kin::external_torques(geometry_, state_.q, state_.external_wrench);
    return ok(f, {tau.begin(), tau.end()});
  };
  handlers_["getJointsMeasuredTorques"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    auto tau = kin::external_torques(geometry_, state_.q, state_.external_wrench);
    for (int i = 0; i < kin::kNumJoints; ++i) tau[i] += geometry_.measured_torque_offset[i];
    return ok(f, {tau.begin(), tau.end()});
  };
  auto joint_index = [](const protocol::WireFrame& f) {
    const double v = f.args[0];
    if (v < 1 || v > kin::kNumJoints || v != std::floor(v))
      throw KstError(Errc::bad_args, "joint index must be an integer in 1..7");
    return static_cast<int>(v) - 1;
  };
  handlers_["getMeasuredTorqueAtJoint"] = [this, need, joint_index](const protocol::WireFrame& f) {
    need(f, 1);
    const int i = joint_index(f);
    const auto tau = kin::external_torques(geometry_, state_.q, state_.external_wrench);
    return ok(f, {tau[i] + geometry_.measured_torque_offset[i]});
  };
  handlers_["getExternalTorqueAtJoint"] = [this, need, joint_index](const protocol::WireFrame& f) {
    need(f, 1);
    const auto tau = kin::external_torques(geometry_, state_.q, state_.external_wrench);
    return ok(f, {tau[joint_index(f)]});
  };
  handlers_["getEEFOrientationR"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    const kin::RotationMatrix R = kin::forward_transform(geometry_, state_.q).R;
    std::vector<double> v;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) v.push_back(R(r, c));
    return ok(f, std::move(v));
  };
  handlers_["getEEFOrientationQuat"] = [this, need](const protocol::WireFrame& f) {
    need(f, 0);
    const Eigen::Vector4d q = kin::matrix_to_quat(kin::forward_transform(geometry_, state_.q).R);
    return ok(f, {q[0], q[1], q[2], q[3]});
  };
  for (int pin : kInputPins) {
    handlers_["getPin" + std::to_string(pin) + "State"] =
        [this, need, pin](const protocol::WireFrame& f) {
          need(f, 0);
          return ok(f, {state_.pins_in.at(pin) ? 1.0 : 0.0});
        };
  }

  // --- physical interaction ---------------------------------------------
  handlers_["startHandGuiding"] = [this, need, require_idle](const protocol::WireFrame& f) {
    need(f, 0);
    require_idle(f);
    state_.mode = Mode::hand_guiding;
    state_.guided_this_session = false;
    state_.flicker_latched = false;
    guide_target_.reset();
    return ok(f);
  };
  handlers_["performEventFunctionAtDoubleHit"] = [this, need](const protocol::WireFrame& f) {
    need(f, 1);
    if (!is_flag(f.args[0]))
      throw KstError(Errc::bad_args, "performEventFunctionAtDoubleHit expects 0 or 1");
    watch_double_hit(f.args[0] == 1.0);
    return ok(f);
  };

  // --- simulated world (side channel) -------------------------------------
  handlers_["injectButton"] = [this, need](const protocol::WireFrame& f) {
    need(f, 2);
    if (!is_flag(f.args[0]) || !is_flag(f.args[1]))
      throw KstError(Errc::bad_args, "injectButton expects button 0|1 and edge 0|1");
    inject_button(f.args[0] == 0.0 ? Button::white : Button::green,
                  f.args[1] == 1.0 ? Edge::press : Edge::release);
    return ok(f);
  };
  handlers_["injectGuidePose"] = [this, need](const protocol::WireFrame& f) {
    need(f, 7);
    inject_guide_pose(joints_from(f.args));
    return ok(f);
  };
  handlers_["injectWrench"] = [this, need](const protocol::WireFrame& f) {
    need(f, 6);
    inject_wrench({{f.args[0], f.args[1], f.args[2]}, {f.args[3], f.args[4], f.args[5]}});
    return ok(f);
  };
  handlers_["injectPin"] = [this, need](const protocol::WireFrame& f) {
    need(f, 2);
    if (f.args[0] != std::floor(f.args[0]) || !is_flag(f.args[1]))
      throw KstError(Errc::bad_args, "injectPin expects pin index and level 0|1");
    inject_pin(static_cast<int>(f.args[0]), f.args[1] == 1.0);
    return ok(f);
  };
  handlers_["clockStep"] = [this, need](const protocol::WireFrame& f) {
    need(f, 1);
    if (!opt_.virtual_time)
      throw KstError(Errc::bad_mode, "clockStep is only valid in virtual-time mode");
    const double n = f.args[0];
    if (n < 1 || n != std::floor(n) || n > static_cast<double>(kMaxClockStep))
      throw KstError(Errc::bad_args, "clockStep expects a positive tick count");
    for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(n); ++k) tick();
    return ok(f);
  };
}

SimController::Outcome SimController::handle_command(const protocol::WireFrame& frame) {
  auto it = handlers_.find(frame.tag);
  try {
    if (it == handlers_.end()) throw KstError(Errc::unknown_cmd, "unknown command: " + frame.tag);
    return it->second(frame);
  } catch (const KstError& e) {
    return fail(frame, e.code());
  }
}

}  // namespace kst::sim
