#pragma once

#include "kst/demos/scenario.hpp"
#include "kst/kin/kinematics.hpp"

namespace kst::demos {

/// Gains and geometry of the joint-space potential-field controller:
/// linear attraction toward q_home plus an inverse-distance repulsive force
/// on the EEF mapped through the Jacobian transpose.
struct AvoidanceConfig {
  double k_att = 1.0;       // 1/s, attraction toward home
  double k_rep = 4.0e7;     // repulsion scale (mm-based potential)
  double rho0_mm = 300.0;   // influence distance
  double rate_hz = 275.0;   // control loop rate
  double z_floor_mm = 0.0;  // table-top plane; EEF never commanded below it
  kin::JointVector q_home{};
};

/// One control step of length dt: q' = q + dt * qdot with
/// qdot = k_att (q_home - q) + J^T F_rep, F_rep the classical repulsive
/// gradient k_rep (1/rho - 1/rho0) / rho^2 * grad(rho) for rho < rho0.
/// Descent through the z floor is projected out of qdot; the result is
/// clamped to the joint limits. Per-joint speed is capped at the limit the
/// controller can track.
kin::JointVector potential_field_step(const kin::JointVector& q,
                                      const Eigen::Vector3d& obstacle_mm,
                                      const AvoidanceConfig& cfg, const kin::RobotGeometry& g,
                                      double dt);

/// EEF distance to the obstacle, mm.
double obstacle_distance(const kin::JointVector& q, const Eigen::Vector3d& obstacle_mm,
                         const kin::RobotGeometry& g);

}  // namespace kst::demos
