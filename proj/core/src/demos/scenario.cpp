#include "kst/demos/scenario.hpp"

#include <fstream>

#include <json.hpp>

#include "kst/errors.hpp"

namespace kst::demos {

std::vector<ObstacleSample> load_obstacle_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw KstError(Errc::io, "cannot open scenario file: " + path);
  std::vector<ObstacleSample> stream;
  std::string line;
  double prev = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = nlohmann::json::parse(line);
    ObstacleSample s;
    s.stamp_s = row.at("t").get<double>();
    s.position_mm = {row.at("p").at(0).get<double>(), row.at("p").at(1).get<double>(),
                     row.at("p").at(2).get<double>()};
    if (s.stamp_s <= prev)
      throw KstError(Errc::bad_args, "scenario stamps must be strictly increasing");
    prev = s.stamp_s;
    stream.push_back(s);
  }
  return stream;
}

void save_obstacle_stream(const std::string& path, const std::vector<ObstacleSample>& stream) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw KstError(Errc::io, "cannot open scenario file: " + path);
  for (const auto& s : stream) {
    nlohmann::json row;
    row["t"] = s.stamp_s;
    row["p"] = {s.position_mm.x(), s.position_mm.y(), s.position_mm.z()};
    out << row.dump() << '\n';
  }
}

Eigen::Vector3d obstacle_at(const std::vector<ObstacleSample>& stream, double t) {
  if (stream.empty()) throw KstError(Errc::bad_args, "empty obstacle stream");
  if (t <= stream.front().stamp_s) return stream.front().position_mm;
  if (t >= stream.back().stamp_s) return stream.back().position_mm;
  // linear scan is fine: demo loops walk t monotonically over short files
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (t <= stream[i].stamp_s) {
      const auto& a = stream[i - 1];
      const auto& b = stream[i];
      const double u = (t - a.stamp_s) / (b.stamp_s - a.stamp_s);
      return a.position_mm + u * (b.position_mm - a.position_mm);
    }
  }
  return stream.back().position_mm;
}

double stream_duration(const std::vector<ObstacleSample>& stream) {
  return stream.empty() ? 0.0 : stream.back().stamp_s;
}

}  // namespace kst::demos
