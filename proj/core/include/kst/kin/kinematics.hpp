#pragma once

#include "kst/kin/geometry.hpp"
#include "kst/kin/rotation.hpp"
#include "kst/kin/types.hpp"

namespace kst::kin {

/// Base -> EEF transform (position in mm). Throws KstError(limit) when q is
/// outside the joint limits.
Transform forward_transform(const RobotGeometry& g, const JointVector& q);

CartesianPose forward_kinematics(const RobotGeometry& g, const JointVector& q);

/// Column i is the spatial velocity of the EEF per unit velocity of joint i,
/// expressed in the base frame (linear mm/rad on top, angular below).
Jacobian jacobian(const RobotGeometry& g, const JointVector& q);

struct IkOptions {
  double tol_pos_mm = 0.1;
  double tol_ori_rad = 1e-4;
  int max_iter = 200;
  double damping_sq = 1e-6;     // Levenberg lambda^2, mm/rad mixed units
  double step_clamp_rad = 0.2;  // per-iteration per-joint cap
  double ori_scale_mm = 1000.0; // radians -> mm-equivalent error weighting
  bool clamp_to_limits = true;
};

struct IkResult {
  JointVector q{};
  int iterations = 0;
  double pos_err_mm = 0;
  double ori_err_rad = 0;
};

/// Damped-least-squares IK seeded at `seed`. Throws KstError(unreachable)
/// when it cannot converge, KstError(limit) when a solution exists only
/// outside the joint limits.
IkResult inverse_kinematics(const RobotGeometry& g, const CartesianPose& target,
                            const JointVector& seed, const IkOptions& opt = {});

/// One damped-least-squares update from `q` toward `target`, clamped to the
/// joint limits. No convergence requirement (used by Cartesian streaming).
JointVector ik_step(const RobotGeometry& g, const CartesianPose& target, const JointVector& q,
                    const IkOptions& opt = {});

/// Joint torques (N*m) equivalent to wrench `w` (base frame, acting at the
/// EEF origin): tau = J^T * w with linear rows rescaled mm -> m.
std::array<double, kNumJoints> external_torques(const RobotGeometry& g, const JointVector& q,
                                                const Wrench& w);

}  // namespace kst::kin
