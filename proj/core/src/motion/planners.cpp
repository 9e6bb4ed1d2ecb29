#include "kst/motion/planners.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "kst/errors.hpp"

namespace kst::motion {

namespace {

// peak angular speed used when a move is rotation-dominated
constexpr double kOrientationRate = 0.5;  // rad/s

std::size_t sample_steps(double duration, double dt) {
  if (duration <= 0) return 0;
  return static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
}

bool same_joints(const kin::JointVector& a, const kin::JointVector& b) {
  for (int i = 0; i < kin::kNumJoints; ++i)
    if (a[i] != b[i]) return false;
  return true;
}

bool same_pose(const kin::CartesianPose& a, const kin::CartesianPose& b) {
  return a.x == b.x && a.y == b.y && a.z == b.z && a.alpha == b.alpha && a.beta == b.beta &&
         a.gamma == b.gamma;
}

}  // namespace

ArcSpec ArcSpec::center_normal_arc(const Eigen::Vector3d& center, const Eigen::Vector3d& normal,
                                   double radius_mm, double angle_rad) {
  ArcSpec s;
  s.kind = Kind::center_normal;
  s.center = center;
  s.normal = normal;
  s.radius_mm = radius_mm;
  s.angle_rad = angle_rad;
  return s;
}

ArcSpec ArcSpec::plane_arc(Kind plane, double c1, double c2, double out_of_plane, double radius_mm,
                           double angle_rad) {
  ArcSpec s;
  s.kind = plane;
  s.radius_mm = radius_mm;
  s.angle_rad = angle_rad;
  switch (plane) {
    case Kind::plane_xy:
      s.center = {c1, c2, out_of_plane};
      s.normal = Eigen::Vector3d::UnitZ();
      break;
    case Kind::plane_xz:
      s.center = {c1, out_of_plane, c2};
      s.normal = Eigen::Vector3d::UnitY();
      break;
    case Kind::plane_yz:
      s.center = {out_of_plane, c1, c2};
      s.normal = Eigen::Vector3d::UnitX();
      break;
    default:
      throw KstError(Errc::bad_args, "plane_arc needs a plane kind");
  }
  return s;
}

ArcSpec ArcSpec::two_frames_arc(const kin::CartesianPose& via, const kin::CartesianPose& end) {
  ArcSpec s;
  s.kind = Kind::two_frames;
  s.via = via;
  s.end = end;
  return s;
}

JointTrajectory plan_joint_ptp(const kin::JointVector& start, const kin::JointVector& goal,
                               double override_vel, const kin::RobotGeometry& g, double dt) {
  if (!(override_vel > 0) || override_vel > 1.0)
    throw KstError(Errc::bad_args, "override velocity must be in (0, 1]");
  if (!g.within_limits(start) || !g.within_limits(goal))
    throw KstError(Errc::limit, "PTP endpoints outside joint limits");

  JointTrajectory traj;
  traj.dt = dt;
  if (same_joints(start, goal)) {
    traj.samples = {start};
    return traj;
  }

  // slowest joint under override * limit paces everyone
  int limiting = 0;
  double t_max = 0, d_limiting = 0;
  for (int i = 0; i < kin::kNumJoints; ++i) {
    const double d = std::abs(goal[i] - start[i]);
    const double t = trapezoid_duration(d, override_vel * g.qd_max[i]);
    if (t > t_max) {
      t_max = t;
      limiting = i;
      d_limiting = d;
    }
  }
  const TrapezoidProfile prof(d_limiting, override_vel * g.qd_max[limiting]);
  traj.duration = prof.duration();

  const std::size_t steps = sample_steps(traj.duration, dt);
  traj.samples.reserve(steps + 1);
  for (std::size_t k = 0; k < steps; ++k) {
    const double s = prof.position(static_cast<double>(k) * dt) / d_limiting;
    kin::JointVector q;
    for (int i = 0; i < kin::kNumJoints; ++i) q[i] = start[i] + (goal[i] - start[i]) * s;
    traj.samples.push_back(q);
  }
  traj.samples.push_back(goal);
  return traj;
}

namespace {

/// Shared Cartesian sampler: positions from `position(u)`, orientation
/// slerped (or held) between two rotations, both driven by one trapezoid.
template <typename PositionFn>
CartesianPath sample_cartesian(PositionFn&& position, const kin::RotationMatrix& R0,
                               const kin::RotationMatrix& R1, double travel, double v_mm_s,
                               double dt) {
  const double angle = kin::rotation_log(R0.transpose() * R1).norm();
  const TrapezoidProfile trans(travel, v_mm_s);
  const TrapezoidProfile rot(angle, kOrientationRate);
  const bool rotation_paces = rot.duration() > trans.duration();
  const TrapezoidProfile& prof = rotation_paces ? rot : trans;
  const double total = rotation_paces ? angle : travel;

  CartesianPath path;
  path.dt = dt;
  path.duration = prof.duration();
  const std::size_t steps = sample_steps(path.duration, dt);
  path.poses.reserve(steps + 1);
  for (std::size_t k = 0; k < steps; ++k) {
    const double u = total > 0 ? prof.position(static_cast<double>(k) * dt) / total : 0.0;
    kin::Transform t;
    t.p = position(u);
    t.R = angle > 0 ? kin::interpolate_rotation(R0, R1, u) : R0;
    path.poses.push_back(kin::transform_to_pose(t));
  }
  return path;  // caller appends the exact final pose
}

}  // namespace

CartesianPath plan_line(const kin::CartesianPose& start, const kin::CartesianPose& goal,
                        double v_mm_s, double dt) {
  if (!(v_mm_s > 0)) throw KstError(Errc::bad_args, "line velocity must be positive");
  CartesianPath path;
  path.dt = dt;
  if (same_pose(start, goal)) {
    path.poses = {start};
    return path;
  }
  const Eigen::Vector3d p0{start.x, start.y, start.z};
  const Eigen::Vector3d p1{goal.x, goal.y, goal.z};
  const kin::RotationMatrix R0 = kin::angles_to_matrix(start.alpha, start.beta, start.gamma);
  const kin::RotationMatrix R1 = kin::angles_to_matrix(goal.alpha, goal.beta, goal.gamma);
  path = sample_cartesian([&](double u) { return (p0 + u * (p1 - p0)).eval(); }, R0, R1,
                          (p1 - p0).norm(), v_mm_s, dt);
  path.poses.push_back(goal);
  return path;
}

CartesianPath plan_arc(const kin::CartesianPose& start, const ArcSpec& spec, double v_mm_s,
                       double dt) {
  if (!(v_mm_s > 0)) throw KstError(Errc::bad_args, "arc velocity must be positive");

  Eigen::Vector3d center, normal;
  double radius, sweep;
  const Eigen::Vector3d p0{start.x, start.y, start.z};
  const kin::RotationMatrix R0 = kin::angles_to_matrix(start.alpha, start.beta, start.gamma);
  kin::RotationMatrix R1 = R0;
  bool slerp_orientation = false;
  kin::CartesianPose final_pose;

  if (spec.kind == ArcSpec::Kind::two_frames) {
    const Eigen::Vector3d via{spec.via.x, spec.via.y, spec.via.z};
    const Eigen::Vector3d end{spec.end.x, spec.end.y, spec.end.z};
    const Eigen::Vector3d u = via - p0, w = end - p0;
    const Eigen::Vector3d cr = u.cross(w);
    const double scale = std::max({u.norm(), w.norm(), 1.0});
    if (cr.norm() <= 1e-9 * scale * scale)
      throw KstError(Errc::bad_args, "arc frames are collinear with the start pose");
    // circumcenter of (p0, via, end)
    center = p0 + (u.squaredNorm() * w - w.squaredNorm() * u).cross(u.cross(w)) /
                      (2.0 * u.cross(w).squaredNorm());
    radius = (p0 - center).norm();
    normal = cr.normalized();
    const Eigen::Vector3d e1 = (p0 - center) / radius;
    const Eigen::Vector3d e2 = normal.cross(e1);
    auto angle_of = [&](const Eigen::Vector3d& p) {
      const Eigen::Vector3d r = p - center;
      double a = std::atan2(e2.dot(r), e1.dot(r));
      if (a <= 0) a += 2.0 * M_PI;
      return a;
    };
    double via_angle = angle_of(via);
    double end_angle = angle_of(end);
    if (via_angle > end_angle) {
      // sweep the other way so the arc passes through the via frame first
      normal = -normal;
      via_angle = 2.0 * M_PI - via_angle;
      end_angle = 2.0 * M_PI - end_angle;
    }
    sweep = end_angle;
    R1 = kin::angles_to_matrix(spec.end.alpha, spec.end.beta, spec.end.gamma);
    slerp_orientation = true;
    final_pose = spec.end;
  } else {
    if (!(spec.radius_mm > 0)) throw KstError(Errc::bad_args, "arc radius must be positive");
    if (std::abs(spec.angle_rad) > 2.0 * M_PI + 1e-12)
      throw KstError(Errc::bad_args, "arc angle must satisfy |angle| <= 2*pi");
    if (spec.normal.norm() < 1e-12) throw KstError(Errc::bad_args, "arc normal must be nonzero");
    center = spec.center;
    normal = spec.normal.normalized();
    radius = spec.radius_mm;
    sweep = spec.angle_rad;
    // start must lie on the commanded circle
    const Eigen::Vector3d rel = p0 - center;
    const double off_plane = normal.dot(rel);
    const Eigen::Vector3d in_plane = rel - off_plane * normal;
    const double err = std::hypot(in_plane.norm() - radius, off_plane);
    if (err > 1e-6)
      throw KstError(Errc::bad_args, "start pose is not on the commanded circle");
  }

  if (sweep == 0) {
    CartesianPath path;
    path.dt = dt;
    path.poses = {start};
    return path;
  }

  const Eigen::Vector3d rel = p0 - center;
  const Eigen::Vector3d e1 = (rel - normal.dot(rel) * normal).normalized();
  const Eigen::Vector3d e2 = normal.cross(e1);
  auto on_circle = [&](double phi) {
    return (center + radius * (std::cos(phi) * e1 + std::sin(phi) * e2)).eval();
  };

  const double arc_len = std::abs(sweep) * radius;
  CartesianPath path = sample_cartesian([&](double u) { return on_circle(u * sweep); }, R0, R1,
                                        arc_len, v_mm_s, dt);
  if (!slerp_orientation) {
    kin::Transform t;
    t.p = on_circle(sweep);
    t.R = R0;
    final_pose = kin::transform_to_pose(t);
    final_pose.alpha = start.alpha;
    final_pose.beta = start.beta;
    final_pose.gamma = start.gamma;
  }
  path.poses.push_back(final_pose);
  return path;
}

JointTrajectory path_to_joint_trajectory(const CartesianPath& path, const kin::JointVector& seed,
                                         const kin::RobotGeometry& g) {
  if (path.poses.empty()) throw KstError(Errc::bad_args, "empty Cartesian path");
  JointTrajectory traj;
  traj.dt = path.dt;
  traj.duration = path.duration;
  traj.samples.reserve(path.poses.size());

  kin::JointVector q = seed;
  for (std::size_t k = 0; k < path.poses.size(); ++k) {
    try {
      q = kin::inverse_kinematics(g, path.poses[k], q).q;
    } catch (const KstError& e) {
      throw KstError(Errc::unreachable,
                     "IK failed at path sample " + std::to_string(k) + ": " + e.what());
    }
    traj.samples.push_back(q);
  }

  // stretch time uniformly if any joint-speed limit is exceeded
  double worst = 1.0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k)
    for (int i = 0; i < kin::kNumJoints; ++i) {
      const double ratio =
          std::abs(traj.samples[k][i] - traj.samples[k - 1][i]) / (traj.dt * g.qd_max[i]);
      worst = std::max(worst, ratio);
    }
  if (worst > 1.0 + 1e-12) {
    traj.dt *= worst;
    traj.duration *= worst;
  }
  return traj;
}

JointTrajectory plan_joint_waypoints(const kin::JointVector& start,
                                     const std::vector<kin::JointVector>& waypoints,
                                     double override_vel, const kin::RobotGeometry& g, double dt) {
  JointTrajectory traj;
  traj.dt = dt;
  traj.samples = {start};
  kin::JointVector cur = start;
  for (const auto& wp : waypoints) {
    JointTrajectory seg = plan_joint_ptp(cur, wp, override_vel, g, dt);
    for (std::size_t k = 1; k < seg.samples.size(); ++k) traj.samples.push_back(seg.samples[k]);
    traj.duration += seg.duration;
    cur = wp;
  }
  return traj;
}

}  // namespace kst::motion
