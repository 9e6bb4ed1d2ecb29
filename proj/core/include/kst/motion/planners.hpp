#pragma once

#include <vector>

#include "kst/kin/kinematics.hpp"
#include "kst/motion/trapezoid.hpp"

namespace kst::motion {

struct JointTrajectory {
  double dt = kServerDt;  // sample period, s
  double duration = 0;    // s; samples span [0, duration]
  std::vector<kin::JointVector> samples;
};

struct CartesianPath {
  double dt = kServerDt;
  double duration = 0;
  std::vector<kin::CartesianPose> poses;
};

struct ArcSpec {
  enum class Kind { two_frames, center_normal, plane_xy, plane_xz, plane_yz };
  Kind kind = Kind::center_normal;

  // two_frames: via = first frame (a point the arc passes through),
  // end = second frame (arc endpoint; orientation slerp target)
  kin::CartesianPose via, end;

  // center_normal and the plane variants
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // mm
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ(); // unit length
  double radius_mm = 0;
  double angle_rad = 0;  // signed sweep, |angle| <= 2*pi

  static ArcSpec center_normal_arc(const Eigen::Vector3d& center, const Eigen::Vector3d& normal,
                                   double radius_mm, double angle_rad);
  /// Plane variants: in-plane center coordinates plus the out-of-plane
  /// coordinate (e.g. XY: cx, cy + z height). Normal is the plane axis.
  static ArcSpec plane_arc(Kind plane, double c1, double c2, double out_of_plane,
                           double radius_mm, double angle_rad);
  static ArcSpec two_frames_arc(const kin::CartesianPose& via, const kin::CartesianPose& end);
};

/// Time-synchronized joint-space point-to-point move: one normalized
/// trapezoid (fixed 0.2 s ramp) paced by the slowest joint at
/// override * its velocity limit; every joint scales that profile.
JointTrajectory plan_joint_ptp(const kin::JointVector& start, const kin::JointVector& goal,
                               double override_vel, const kin::RobotGeometry& g,
                               double dt = kServerDt);

/// Straight-line EEF move at `v_mm_s` peak speed with constant-axis
/// orientation interpolation, both following one trapezoid profile.
CartesianPath plan_line(const kin::CartesianPose& start, const kin::CartesianPose& goal,
                        double v_mm_s, double dt = kServerDt);

CartesianPath plan_arc(const kin::CartesianPose& start, const ArcSpec& spec, double v_mm_s,
                       double dt = kServerDt);

/// Resolves a Cartesian path sample-by-sample through IK, each solve seeded
/// by the previous sample. If any joint-speed limit is exceeded, dt (and
/// duration) are stretched uniformly by the smallest factor restoring
/// feasibility.
JointTrajectory path_to_joint_trajectory(const CartesianPath& path, const kin::JointVector& seed,
                                         const kin::RobotGeometry& g);

/// Piecewise concatenation of plan_joint_ptp segments with zero-velocity
/// junctions (continuous joint-space path through all waypoints).
JointTrajectory plan_joint_waypoints(const kin::JointVector& start,
                                     const std::vector<kin::JointVector>& waypoints,
                                     double override_vel, const kin::RobotGeometry& g,
                                     double dt = kServerDt);

}  // namespace kst::motion
