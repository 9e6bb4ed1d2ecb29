#include "kst/kin/kinematics.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "kst/errors.hpp"

namespace kst::kin {

namespace {

void require_within_limits(const RobotGeometry& g, const JointVector& q) {
  if (!g.within_limits(q)) throw KstError(Errc::limit, "joint vector outside limits");
}

/// Link transform for one modified-DH row: Rx(alpha) * Tx(a) * Rz(theta) * Tz(d).
Transform link_transform(const DhRow& row, double q) {
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  const double th = row.theta + q;
  const double ct = std::cos(th), st = std::sin(th);
  Transform t;
  t.R << ct, -st, 0,
         st * ca, ct * ca, -sa,
         st * sa, ct * sa, ca;
  t.p = {row.a, -sa * row.d, ca * row.d};
  return t;
}

struct Frames {
  std::array<Transform, kNumJoints> joint;  // base -> frame i (axis of joint i is joint[i].R.col(2))
  Transform eef;                            // base -> EEF (flange * tool)
};

Frames chain(const RobotGeometry& g, const JointVector& q) {
  Frames f;
  Transform t;
  for (int i = 0; i < kNumJoints; ++i) {
    t = t * link_transform(g.dh[i], q[i]);
    f.joint[i] = t;
  }
  f.eef = t * g.tool;
  return f;
}

}  // namespace

Transform forward_transform(const RobotGeometry& g, const JointVector& q) {
  require_within_limits(g, q);
  return chain(g, q).eef;
}

CartesianPose forward_kinematics(const RobotGeometry& g, const JointVector& q) {
  return transform_to_pose(forward_transform(g, q));
}

Jacobian jacobian(const RobotGeometry& g, const JointVector& q) {
  require_within_limits(g, q);
  Frames f = chain(g, q);
  Jacobian J;
  for (int i = 0; i < kNumJoints; ++i) {
    const Eigen::Vector3d axis = f.joint[i].R.col(2);
    J.col(i).head<3>() = axis.cross(f.eef.p - f.joint[i].p);
    J.col(i).tail<3>() = axis;
  }
  return J;
}

namespace {

struct IkIterate {
  JointVector q{};
  int iterations = 0;
  double pos_err = 0, ori_err = 0;
  bool converged = false;
};

/// One damped update q += J^T (J J^T + lambda^2 I)^-1 err with per-joint step
/// cap and optional limit clamping.
void dls_update(const RobotGeometry& g, const Frames& f, const Transform& target, JointVector& q,
                const IkOptions& opt, bool clamp) {
  Eigen::Matrix<double, 6, 1> err;
  err.head<3>() = target.p - f.eef.p;
  err.tail<3>() = rotation_log(target.R * f.eef.R.transpose()) * opt.ori_scale_mm;
  Jacobian J;
  for (int i = 0; i < kNumJoints; ++i) {
    const Eigen::Vector3d axis = f.joint[i].R.col(2);
    J.col(i).head<3>() = axis.cross(f.eef.p - f.joint[i].p);
    J.col(i).tail<3>() = axis * opt.ori_scale_mm;
  }
  Eigen::Matrix<double, 6, 6> JJt = J * J.transpose();
  JJt.diagonal().array() += opt.damping_sq;
  Eigen::Matrix<double, kNumJoints, 1> dq = J.transpose() * JJt.ldlt().solve(err);
  const double biggest = dq.cwiseAbs().maxCoeff();
  if (biggest > opt.step_clamp_rad) dq *= opt.step_clamp_rad / biggest;
  for (int i = 0; i < kNumJoints; ++i) {
    q[i] += dq[i];
    if (clamp) q[i] = std::clamp(q[i], g.q_min[i], g.q_max[i]);
  }
}

IkIterate run_dls(const RobotGeometry& g, const Transform& target, const JointVector& seed,
                  const IkOptions& opt, bool clamp) {
  IkIterate it;
  it.q = seed;
  for (int k = 0; k < opt.max_iter; ++k) {
    Frames f = chain(g, it.q);
    it.pos_err = (target.p - f.eef.p).norm();
    it.ori_err = rotation_log(target.R * f.eef.R.transpose()).norm();
    it.iterations = k;
    if (it.pos_err <= opt.tol_pos_mm && it.ori_err <= opt.tol_ori_rad) {
      it.converged = true;
      return it;
    }
    dls_update(g, f, target, it.q, opt, clamp);
  }
  // final error at the last iterate
  Frames f = chain(g, it.q);
  it.pos_err = (target.p - f.eef.p).norm();
  it.ori_err = rotation_log(target.R * f.eef.R.transpose()).norm();
  it.converged = it.pos_err <= opt.tol_pos_mm && it.ori_err <= opt.tol_ori_rad;
  it.iterations = opt.max_iter;
  return it;
}

}  // namespace

IkResult inverse_kinematics(const RobotGeometry& g, const CartesianPose& target,
                            const JointVector& seed, const IkOptions& opt) {
  require_within_limits(g, seed);
  const Transform target_t = pose_to_transform(target);
  IkIterate it = run_dls(g, target_t, seed, opt, opt.clamp_to_limits);
  if (!it.converged) {
    if (opt.clamp_to_limits) {
      // Distinguish "out of reach" from "reachable only beyond the limits".
      IkIterate free = run_dls(g, target_t, seed, opt, false);
      if (free.converged && !g.within_limits(free.q))
        throw KstError(Errc::limit, "target reachable only outside joint limits");
    }
    throw KstError(Errc::unreachable, "IK did not converge within max_iter");
  }
  return {it.q, it.iterations, it.pos_err, it.ori_err};
}

JointVector ik_step(const RobotGeometry& g, const CartesianPose& target, const JointVector& q,
                    const IkOptions& opt) {
  JointVector out = q;
  dls_update(g, chain(g, q), pose_to_transform(target), out, opt, true);
  return out;
}

std::array<double, kNumJoints> external_torques(const RobotGeometry& g, const JointVector& q,
                                                const Wrench& w) {
  const Jacobian J = jacobian(g, q);
  std::array<double, kNumJoints> tau{};
  for (int i = 0; i < kNumJoints; ++i) {
    // linear rows are mm/rad; divide by 1000 so force * lever arm lands in N*m
    tau[i] = J.col(i).head<3>().dot(w.force) / 1000.0 + J.col(i).tail<3>().dot(w.moment);
  }
  return tau;
}

}  // namespace kst::kin
