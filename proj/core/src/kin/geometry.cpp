#include "kst/kin/geometry.hpp"

#include <cmath>

#include "kst/config/toml_lite.hpp"
#include "kst/errors.hpp"
#include "kst/kin/rotation.hpp"

namespace kst::kin {

namespace {
constexpr double kDeg = M_PI / 180.0;

std::array<double, kNumJoints> to_array7(const std::vector<double>& v, const char* what) {
  if (v.size() != kNumJoints)
    throw KstError(Errc::bad_args, std::string(what) + " must have exactly 7 entries");
  std::array<double, kNumJoints> out{};
  for (int i = 0; i < kNumJoints; ++i) out[i] = v[i];
  return out;
}
}  // namespace

RobotGeometry RobotGeometry::iiwa7_r800() {
  RobotGeometry g;
  const double hp = M_PI / 2.0;
  g.dh = {DhRow{0, 0, 340.0, 0},   DhRow{0, -hp, 0, 0}, DhRow{0, hp, 400.0, 0},
          DhRow{0, hp, 0, 0},      DhRow{0, -hp, 400.0, 0}, DhRow{0, -hp, 0, 0},
          DhRow{0, hp, 126.0, 0}};
  const std::array<double, kNumJoints> lim_deg = {170, 120, 170, 120, 170, 120, 175};
  const std::array<double, kNumJoints> vel_deg = {98, 98, 100, 130, 140, 180, 180};
  for (int i = 0; i < kNumJoints; ++i) {
    g.q_max[i] = lim_deg[i] * kDeg;
    g.q_min[i] = -g.q_max[i];
    g.qd_max[i] = vel_deg[i] * kDeg;
  }
  g.home = {};
  // folded transport pose: elbow and wrist tucked in over the base
  g.transport = {0, 25 * kDeg, 0, -110 * kDeg, 0, 50 * kDeg, 0};
  return g;
}

bool RobotGeometry::within_limits(const JointVector& q, double slack) const {
  for (int i = 0; i < kNumJoints; ++i)
    if (q[i] < q_min[i] - slack || q[i] > q_max[i] + slack) return false;
  return true;
}

JointVector RobotGeometry::clamp_to_limits(const JointVector& q) const {
  JointVector out = q;
  for (int i = 0; i < kNumJoints; ++i) out[i] = std::clamp(out[i], q_min[i], q_max[i]);
  return out;
}

void RobotGeometry::validate() const {
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(q_max[i] > q_min[i]))
      throw KstError(Errc::bad_args, "joint limit width must be positive (joint " + std::to_string(i + 1) + ")");
    if (!(qd_max[i] > 0))
      throw KstError(Errc::bad_args, "joint velocity limit must be positive (joint " + std::to_string(i + 1) + ")");
  }
  if (!within_limits(home) || !within_limits(transport))
    throw KstError(Errc::bad_args, "home/transport configuration outside joint limits");
}

RobotGeometry load_geometry(const std::string& path) {
  const auto toml = config::TomlLite::parse_file(path);
  RobotGeometry g = RobotGeometry::iiwa7_r800();

  auto arr7 = [&](const char* key) { return toml.array(key); };
  if (toml.has("dh.a")) {
    auto a = to_array7(arr7("dh.a"), "dh.a");
    auto alpha = to_array7(arr7("dh.alpha"), "dh.alpha");
    auto d = to_array7(arr7("dh.d"), "dh.d");
    auto theta = to_array7(arr7("dh.theta"), "dh.theta");
    for (int i = 0; i < kNumJoints; ++i) g.dh[i] = {a[i], alpha[i], d[i], theta[i]};
  }
  if (toml.has("limits.position_deg")) {
    auto lim = to_array7(toml.array("limits.position_deg"), "limits.position_deg");
    for (int i = 0; i < kNumJoints; ++i) {
      g.q_max[i] = lim[i] * kDeg;
      g.q_min[i] = -g.q_max[i];
    }
  }
  if (toml.has("limits.velocity_deg_s")) {
    auto vel = to_array7(toml.array("limits.velocity_deg_s"), "limits.velocity_deg_s");
    for (int i = 0; i < kNumJoints; ++i) g.qd_max[i] = vel[i] * kDeg;
  }
  if (toml.has("tool.xyz")) {
    const auto& xyz = toml.array("tool.xyz");
    if (xyz.size() != 3) throw KstError(Errc::bad_args, "tool.xyz must have 3 entries");
    g.tool.p = {xyz[0], xyz[1], xyz[2]};
  }
  if (toml.has("tool.abg")) {
    const auto& abg = toml.array("tool.abg");
    if (abg.size() != 3) throw KstError(Errc::bad_args, "tool.abg must have 3 entries");
    g.tool.R = angles_to_matrix(abg[0], abg[1], abg[2]);
  }
  if (toml.has("poses.home")) g.home = to_array7(toml.array("poses.home"), "poses.home");
  if (toml.has("poses.transport"))
    g.transport = to_array7(toml.array("poses.transport"), "poses.transport");
  if (toml.has("server.measured_torque_offset"))
    g.measured_torque_offset =
        to_array7(toml.array("server.measured_torque_offset"), "server.measured_torque_offset");
  g.double_hit_threshold_n = toml.number_or("server.double_hit_threshold_n", g.double_hit_threshold_n);
  g.double_hit_window_s = toml.number_or("server.double_hit_window_s", g.double_hit_window_s);

  g.validate();
  return g;
}

}  // namespace kst::kin
