#pragma once

namespace kst::motion {

inline constexpr double kRampTime = 0.2;    // s, fixed acceleration ramp
inline constexpr double kServerDt = 0.005;  // s, server tick / sample period

/// Scalar trapezoidal speed profile over a nonnegative distance: ramp up for
/// `ramp_time`, cruise at `peak_vel`, ramp down. Falls back to a triangular
/// profile (same acceleration peak_vel/ramp_time) when the distance is too
/// short to reach cruise speed.
class TrapezoidProfile {
 public:
  TrapezoidProfile(double distance, double peak_vel, double ramp_time = kRampTime);

  double duration() const { return duration_; }
  bool triangular() const { return triangular_; }
  /// Distance covered at time t; clamped to [0, distance].
  double position(double t) const;

 private:
  double distance_, accel_, ramp_, cruise_vel_, duration_;
  bool triangular_;
};

/// Closed-form duration of the profile above.
double trapezoid_duration(double distance, double peak_vel, double ramp_time = kRampTime);

}  // namespace kst::motion
