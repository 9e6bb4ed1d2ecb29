#include "kst/demos/potential_field.hpp"

#include <cmath>

#include "kst/errors.hpp"

namespace kst::demos {

double obstacle_distance(const kin::JointVector& q, const Eigen::Vector3d& obstacle_mm,
                         const kin::RobotGeometry& g) {
  const kin::Transform t = kin::forward_transform(g, q);
  return (t.p - obstacle_mm).norm();
}

kin::JointVector potential_field_step(const kin::JointVector& q,
                                      const Eigen::Vector3d& obstacle_mm,
                                      const AvoidanceConfig& cfg, const kin::RobotGeometry& g,
                                      double dt) {
  if (!g.within_limits(q)) throw KstError(Errc::limit, "joint vector outside limits");

  const kin::Transform t = kin::forward_transform(g, q);
  const kin::Jacobian J = kin::jacobian(g, q);

  Eigen::Matrix<double, 7, 1> qdot = cfg.k_att * (kin::as_vec(cfg.q_home) - kin::as_vec(q));

  const Eigen::Vector3d away = t.p - obstacle_mm;
  const double rho = away.norm();
  if (rho < cfg.rho0_mm && rho > 1e-9) {
    const double scale = cfg.k_rep * (1.0 / rho - 1.0 / cfg.rho0_mm) / (rho * rho);
    const Eigen::Vector3d f_rep = scale * (away / rho);
    qdot += J.topRows<3>().transpose() * f_rep;
  }

  // keep the EEF above the table: project out descending motion at the floor
  const Eigen::Matrix<double, 1, 7> jz = J.row(2);
  const double z_next = t.p.z() + dt * (jz * qdot)(0);
  if (z_next < cfg.z_floor_mm && (jz * qdot)(0) < 0) {
    const double jz_sq = (jz * jz.transpose())(0);
    if (jz_sq > 1e-12) qdot -= jz.transpose() * ((jz * qdot)(0) / jz_sq);
  }

  // cap at the joint speed limits the controller tracks
  for (int i = 0; i < kin::kNumJoints; ++i)
    qdot[i] = std::clamp(qdot[i], -g.qd_max[i], g.qd_max[i]);

  kin::JointVector next{};
  for (int i = 0; i < kin::kNumJoints; ++i)
    next[i] = std::clamp(q[i] + dt * qdot[i], g.q_min[i], g.q_max[i]);
  return next;
}

}  // namespace kst::demos
