#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace kst::demos {

/// One sample of the scripted obstacle stream (replaces the magnetic
/// tracking sensor): base-frame position in mm at time `stamp_s`.
struct ObstacleSample {
  double stamp_s = 0;
  Eigen::Vector3d position_mm = Eigen::Vector3d::Zero();
};

/// JSONL, one {"t": s, "p": [x, y, z]} per line, stamps strictly increasing.
std::vector<ObstacleSample> load_obstacle_stream(const std::string& path);
void save_obstacle_stream(const std::string& path, const std::vector<ObstacleSample>& stream);

/// Piecewise-linear interpolation; clamps to the first/last sample outside
/// the covered interval. Empty streams have no obstacle (callers treat the
/// distance as infinite).
Eigen::Vector3d obstacle_at(const std::vector<ObstacleSample>& stream, double t);

double stream_duration(const std::vector<ObstacleSample>& stream);

}  // namespace kst::demos
