#pragma once

#include <Eigen/Core>
#include <array>

namespace kst::kin {

inline constexpr int kNumJoints = 7;

/// Seven joint angles in radians.
using JointVector = std::array<double, kNumJoints>;

/// End-effector pose: position in mm, orientation as fixed rotation angles
/// (alpha, beta, gamma) in radians with R = Rz(alpha) * Ry(beta) * Rx(gamma).
struct CartesianPose {
  double x = 0, y = 0, z = 0;
  double alpha = 0, beta = 0, gamma = 0;

  std::array<double, 6> to_array() const { return {x, y, z, alpha, beta, gamma}; }
  static CartesianPose from_array(const std::array<double, 6>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
};

/// Force (N) and moment (N*m) pair. Frame is stated at each use site.
struct Wrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
};

using RotationMatrix = Eigen::Matrix3d;

/// Rigid transform with translation in mm.
struct Transform {
  RotationMatrix R = RotationMatrix::Identity();
  Eigen::Vector3d p = Eigen::Vector3d::Zero();

  Transform operator*(const Transform& rhs) const { return {R * rhs.R, p + R * rhs.p}; }
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return p + R * v; }
};

/// 6x7 base-frame Jacobian: rows 0-2 linear (mm/rad), rows 3-5 angular (rad/rad).
using Jacobian = Eigen::Matrix<double, 6, kNumJoints>;

inline Eigen::Map<const Eigen::Matrix<double, kNumJoints, 1>> as_vec(const JointVector& q) {
  return Eigen::Map<const Eigen::Matrix<double, kNumJoints, 1>>(q.data());
}

}  // namespace kst::kin
