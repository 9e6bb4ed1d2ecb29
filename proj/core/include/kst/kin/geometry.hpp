#pragma once

#include <string>

#include "kst/kin/types.hpp"

namespace kst::kin {

/// One modified-DH row. Link transform i-1 -> i is
/// Rx(alpha) * Tx(a) * Rz(theta_offset + q_i) * Tz(d), lengths in mm.
struct DhRow {
  double a = 0;      // mm
  double alpha = 0;  // rad
  double d = 0;      // mm
  double theta = 0;  // rad, offset added to the joint variable
};

struct RobotGeometry {
  std::array<DhRow, kNumJoints> dh{};
  Transform tool;  // flange -> EEF

  std::array<double, kNumJoints> q_min{};   // rad
  std::array<double, kNumJoints> q_max{};   // rad
  std::array<double, kNumJoints> qd_max{};  // rad/s, strictly positive

  JointVector home{};
  JointVector transport{};
  std::array<double, kNumJoints> measured_torque_offset{};  // N*m, added to external torques

  double double_hit_threshold_n = 20.0;
  double double_hit_window_s = 0.5;

  /// LBR iiwa 7 R800: link offsets 340/400/400/126 mm, joint limits
  /// +-170/120/170/120/170/120/175 deg, speed limits 98/98/100/130/140/180/180 deg/s.
  static RobotGeometry iiwa7_r800();

  bool within_limits(const JointVector& q, double slack = 1e-9) const;
  JointVector clamp_to_limits(const JointVector& q) const;
  void validate() const;  // throws KstError(bad_args) on malformed tables
};

/// Loads a geometry config file (flat TOML subset, see configs/default.toml).
/// Missing keys fall back to the iiwa7_r800 defaults.
RobotGeometry load_geometry(const std::string& path);

}  // namespace kst::kin
