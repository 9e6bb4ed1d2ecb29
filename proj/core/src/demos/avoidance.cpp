#include "kst/demos/avoidance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "kst/motion/trapezoid.hpp"

namespace kst::demos {

namespace {

/// sleep_until with a short spin tail; plain sleep overshoot would show up
/// directly in the inter-command gap percentiles.
void pace_until(std::chrono::steady_clock::time_point deadline) {
  const auto spin_margin = std::chrono::microseconds(150);
  const auto sleep_to = deadline - spin_margin;
  if (std::chrono::steady_clock::now() < sleep_to) std::this_thread::sleep_until(sleep_to);
  while (std::chrono::steady_clock::now() < deadline) {
  }
}

}  // namespace

AvoidanceResult run_avoidance_demo(client::Connection& conn,
                                   const std::vector<ObstacleSample>& stream,
                                   const AvoidanceConfig& cfg, const kin::RobotGeometry& g,
                                   const AvoidanceRunOptions& run) {
  if (!(cfg.rate_hz > 0) || !(cfg.rho0_mm > 0) || cfg.k_att < 0 || cfg.k_rep < 0)
    throw KstError(Errc::bad_args, "avoidance config: rate/rho0 positive, gains nonnegative");

  const double duration = run.duration_s > 0 ? run.duration_s : stream_duration(stream);
  const double dt = 1.0 / cfg.rate_hz;
  const bool lockstep = conn.server_virtual_time();
  const double server_dt = motion::kServerDt;

  std::ofstream trace;
  if (!run.trace_path.empty()) {
    trace.open(run.trace_path, std::ios::trunc);
    if (!trace) throw KstError(Errc::io, "cannot open trace file: " + run.trace_path);
  }

  AvoidanceResult result;
  result.min_rho_mm = std::numeric_limits<double>::infinity();
  result.min_z_mm = std::numeric_limits<double>::infinity();

  // start from home, then hand control to the streaming loop
  client::movePTPJointSpace(conn, cfg.q_home, 0.25);
  client::realTime_startDirectServoJoints(conn);

  AvoidanceConfig step_cfg = cfg;
  if (stream.empty()) step_cfg.k_rep = 0;  // no obstacle: pure attraction

  kin::JointVector shadow = cfg.q_home;
  double clock_debt = 0;      // virtual server ticks owed
  double next_resync = run.resync_period_s;
  std::vector<double> gaps_ms;
  auto t0 = std::chrono::steady_clock::now();
  auto last_send = t0;

  try {
    std::size_t k = 0;
    for (double t = 0; t < duration + 0.5 * dt; t = ++k * dt) {
      shadow = potential_field_step(
          shadow, stream.empty() ? Eigen::Vector3d::Zero() : obstacle_at(stream, t), step_cfg, g,
          dt);
      client::sendJointsPositions(conn, shadow);
      ++result.iterations;

      if (!lockstep) {  // rate statistics are a wall-clock notion
        const auto now = std::chrono::steady_clock::now();
        if (result.iterations > 1)
          gaps_ms.push_back(std::chrono::duration<double, std::milli>(now - last_send).count());
        last_send = now;
      }

      const kin::Transform eef = kin::forward_transform(g, shadow);
      const double rho =
          stream.empty() ? std::numeric_limits<double>::infinity()
                         : (eef.p - obstacle_at(stream, t)).norm();
      result.min_rho_mm = std::min(result.min_rho_mm, rho);
      result.min_z_mm = std::min(result.min_z_mm, eef.p.z());

      if (trace.is_open()) {
        nlohmann::json row;
        row["t"] = t;
        row["q"] = shadow;
        row["rho"] = std::isfinite(rho) ? rho : -1.0;
        row["x"] = {eef.p.x(), eef.p.y(), eef.p.z()};
        trace << row.dump() << '\n';
      }

      if (lockstep) {
        clock_debt += dt / server_dt;
        if (clock_debt >= 1.0) {
          const double whole = std::floor(clock_debt);
          conn.request("clockStep", {whole});
          clock_debt -= whole;
        }
      } else {
        pace_until(t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>((k + 1) * dt)));
      }

      if (t >= next_resync) {
        shadow = client::getJointsPos(conn);
        next_resync += run.resync_period_s;
      }
    }

    client::realTime_stopDirectServoJoints(conn);
  } catch (...) {
    if (trace.is_open()) trace.flush();
    throw;
  }

  for (int i = 0; i < kin::kNumJoints; ++i)
    result.final_home_err_rad =
        std::max(result.final_home_err_rad, std::abs(shadow[i] - cfg.q_home[i]));

  if (!gaps_ms.empty()) {
    const double span_s =
        std::chrono::duration<double>(last_send - t0).count();
    result.mean_rate_hz = span_s > 0 ? static_cast<double>(result.iterations - 1) / span_s : 0;
    std::vector<double> sorted = gaps_ms;
    std::sort(sorted.begin(), sorted.end());
    result.p99_gap_ms = sorted[static_cast<std::size_t>(0.99 * (sorted.size() - 1))];
  }

  if (trace.is_open()) {
    nlohmann::json footer;
    footer["footer"] = {{"iterations", result.iterations},
                        {"min_rho_mm", std::isfinite(result.min_rho_mm) ? result.min_rho_mm : -1.0},
                        {"min_z_mm", result.min_z_mm},
                        {"final_home_err_rad", result.final_home_err_rad},
                        {"mean_rate_hz", result.mean_rate_hz},
                        {"p99_gap_ms", result.p99_gap_ms}};
    trace << footer.dump() << '\n';
  }
  return result;
}

}  // namespace kst::demos
