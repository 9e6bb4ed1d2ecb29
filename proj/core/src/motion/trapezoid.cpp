#include "kst/motion/trapezoid.hpp"

#include <cmath>

#include "kst/errors.hpp"

namespace kst::motion {

TrapezoidProfile::TrapezoidProfile(double distance, double peak_vel, double ramp_time)
    : distance_(distance) {
  if (distance < 0 || !(peak_vel > 0) || !(ramp_time > 0))
    throw KstError(Errc::bad_args, "trapezoid profile needs distance >= 0, peak_vel > 0, ramp > 0");
  accel_ = peak_vel / ramp_time;
  if (distance == 0) {
    triangular_ = false;
    ramp_ = 0;
    cruise_vel_ = 0;
    duration_ = 0;
    return;
  }
  if (distance >= peak_vel * ramp_time) {
    triangular_ = false;
    ramp_ = ramp_time;
    cruise_vel_ = peak_vel;
    duration_ = distance / peak_vel + ramp_time;
  } else {
    triangular_ = true;
    ramp_ = std::sqrt(distance / accel_);
    cruise_vel_ = accel_ * ramp_;
    duration_ = 2.0 * ramp_;
  }
}

double TrapezoidProfile::position(double t) const {
  if (t <= 0) return 0;
  if (t >= duration_) return distance_;
  if (t < ramp_) return 0.5 * accel_ * t * t;
  const double t_dec = duration_ - ramp_;
  if (t <= t_dec) return 0.5 * accel_ * ramp_ * ramp_ + cruise_vel_ * (t - ramp_);
  const double r = duration_ - t;  // time left on the deceleration ramp
  return distance_ - 0.5 * accel_ * r * r;
}

double trapezoid_duration(double distance, double peak_vel, double ramp_time) {
  return TrapezoidProfile(distance, peak_vel, ramp_time).duration();
}

}  // namespace kst::motion
