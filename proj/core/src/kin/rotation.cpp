#include "kst/kin/rotation.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace kst::kin {

namespace {
constexpr double kDegenerateCos = 1e-10;  // |cos(beta)| below this is gimbal lock
}

RotationMatrix angles_to_matrix(double alpha, double beta, double gamma) {
  return (Eigen::AngleAxisd(alpha, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(beta, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(gamma, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

EulerAngles matrix_to_angles(const RotationMatrix& R) {
  // R = Rz(a)*Ry(b)*Rx(g):
  //   [ ca*cb   ca*sb*sg - sa*cg   ca*sb*cg + sa*sg ]
  //   [ sa*cb   sa*sb*sg + ca*cg   sa*sb*cg - ca*sg ]
  //   [ -sb     cb*sg              cb*cg            ]
  EulerAngles e;
  double sb = -R(2, 0);
  sb = std::clamp(sb, -1.0, 1.0);
  e.beta = std::asin(sb);
  double cb = std::sqrt(std::max(0.0, 1.0 - sb * sb));
  if (cb < kDegenerateCos) {
    // gimbal lock: only alpha -/+ gamma is determined; put it all in alpha
    e.degenerate = true;
    e.gamma = 0.0;
    e.alpha = std::atan2(-R(0, 1), R(1, 1));
  } else {
    e.alpha = std::atan2(R(1, 0), R(0, 0));
    e.gamma = std::atan2(R(2, 1), R(2, 2));
  }
  return e;
}

Eigen::Vector4d matrix_to_quat(const RotationMatrix& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  return {q.w(), q.x(), q.y(), q.z()};
}

RotationMatrix quat_to_matrix(const Eigen::Vector4d& wxyz) {
  Eigen::Quaterniond q(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
  q.normalize();
  return q.toRotationMatrix();
}

Eigen::Vector3d rotation_log(const RotationMatrix& R) {
  Eigen::AngleAxisd aa(R);
  double angle = aa.angle();
  if (angle > M_PI) angle -= 2.0 * M_PI;  // shortest representation
  return aa.axis() * angle;
}

RotationMatrix interpolate_rotation(const RotationMatrix& a, const RotationMatrix& b, double u) {
  Eigen::Quaterniond qa(a), qb(b);
  return qa.slerp(u, qb).toRotationMatrix();
}

Transform pose_to_transform(const CartesianPose& pose) {
  return {angles_to_matrix(pose.alpha, pose.beta, pose.gamma), {pose.x, pose.y, pose.z}};
}

CartesianPose transform_to_pose(const Transform& t) {
  EulerAngles e = matrix_to_angles(t.R);
  return {t.p.x(), t.p.y(), t.p.z(), e.alpha, e.beta, e.gamma};
}

}  // namespace kst::kin
