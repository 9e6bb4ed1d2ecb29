#pragma once

#include <string>

#include "kst/client/api.hpp"
#include "kst/demos/potential_field.hpp"

namespace kst::demos {

struct AvoidanceRunOptions {
  double duration_s = -1;        // <= 0: run for the scenario duration
  std::string trace_path;        // JSONL rows + footer when nonempty
  double resync_period_s = 0.1;  // getter resync of the local joint shadow
};

struct AvoidanceResult {
  std::size_t iterations = 0;
  double min_rho_mm = 0;   // infinity rendered as -1 in the footer
  double min_z_mm = 0;
  double final_home_err_rad = 0;  // max-abs joint error to q_home at the end
  double mean_rate_hz = 0;        // wall-clock mode only
  double p99_gap_ms = 0;
};

/// The collision-avoidance loop: enters direct servo, streams
/// potential-field steps computed on a local joint shadow at cfg.rate_hz,
/// and traces {t, q, rho, x}. Against a virtual-time server the loop drives
/// the server clock in lockstep (deterministic traces); against a wall-clock
/// server it paces itself and reports achieved rate statistics.
AvoidanceResult run_avoidance_demo(client::Connection& conn,
                                   const std::vector<ObstacleSample>& stream,
                                   const AvoidanceConfig& cfg, const kin::RobotGeometry& g,
                                   const AvoidanceRunOptions& run = {});

}  // namespace kst::demos
