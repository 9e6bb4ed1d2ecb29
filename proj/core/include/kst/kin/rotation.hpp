#pragma once

#include <Eigen/Core>

#include "kst/kin/types.hpp"

namespace kst::kin {

/// Fixed rotation angles alpha/beta/gamma. The composition is
/// R = Rz(alpha) * Ry(beta) * Rx(gamma) (fixed-axis X-Y-Z, gamma applied
/// first), which matches the KUKA A-B-C convention.
struct EulerAngles {
  double alpha = 0, beta = 0, gamma = 0;
  /// Set when |beta| == pi/2 within tolerance: gamma was forced to 0 and
  /// alpha absorbed the free angle.
  bool degenerate = false;
};

RotationMatrix angles_to_matrix(double alpha, double beta, double gamma);
EulerAngles matrix_to_angles(const RotationMatrix& R);

/// Unit quaternion as (w, x, y, z) with w >= 0.
Eigen::Vector4d matrix_to_quat(const RotationMatrix& R);
RotationMatrix quat_to_matrix(const Eigen::Vector4d& wxyz);

/// Rotation vector (axis * angle, radians) of R; inverse of exp.
Eigen::Vector3d rotation_log(const RotationMatrix& R);

/// Constant-angular-velocity interpolation from `a` (u=0) to `b` (u=1).
RotationMatrix interpolate_rotation(const RotationMatrix& a, const RotationMatrix& b, double u);

Transform pose_to_transform(const CartesianPose& pose);
CartesianPose transform_to_pose(const Transform& t);

}  // namespace kst::kin
