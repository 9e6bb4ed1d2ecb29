#include "kst/client/api.hpp"

#include <fstream>

#include <json.hpp>

namespace kst::client {

namespace {

constexpr std::uint16_t kDefaultPort = 30001;

std::vector<double> pose_args(const CartesianPose& p) {
  return {p.x, p.y, p.z, p.alpha, p.beta, p.gamma};
}

JointVector joints_from(const std::vector<double>& v, std::size_t offset = 0) {
  if (v.size() < offset + 7) throw KstError(Errc::protocol, "payload too short for joint vector");
  JointVector q{};
  for (int i = 0; i < 7; ++i) q[i] = v[offset + i];
  return q;
}

const std::vector<double>& expect_payload(const protocol::Response& r, std::size_t n,
                                          const char* what) {
  if (r.payload.size() != n)
    throw KstError(Errc::protocol, std::string(what) + ": unexpected payload size");
  return r.payload;
}

}  // namespace

Connection net_establishConnection(const std::string& address) {
  std::string host = address;
  std::uint16_t port = kDefaultPort;
  if (auto colon = address.rfind(':'); colon != std::string::npos) {
    host = address.substr(0, colon);
    port = static_cast<std::uint16_t>(std::stoi(address.substr(colon + 1)));
  }
  return Connection::open(host, port);
}

void net_turnOffServer(Connection& c) {
  c.request("net_turnOffServer");
  c.close();
}

// --- motion ------------------------------------------------------------

void movePTPJointSpace(Connection& c, const JointVector& jpos, double relative_velocity) {
  std::vector<double> args(jpos.begin(), jpos.end());
  args.push_back(relative_velocity);
  c.request("movePTPJointSpace", std::move(args), kMotionTimeout);
}

void movePTPHomeJointSpace(Connection& c) {
  c.request("movePTPHomeJointSpace", {}, kMotionTimeout);
}

void movePTPTransportPositionJointSpace(Connection& c) {
  c.request("movePTPTransportPositionJointSpace", {}, kMotionTimeout);
}

void movePTPLineEEF(Connection& c, const CartesianPose& pos, double velocity_mm_s) {
  auto args = pose_args(pos);
  args.push_back(velocity_mm_s);
  c.request("movePTPLineEEF", std::move(args), kMotionTimeout);
}

void movePTPLineEefRelBase(Connection& c, const CartesianPose& delta, double velocity_mm_s) {
  auto args = pose_args(delta);
  args.push_back(velocity_mm_s);
  c.request("movePTPLineEefRelBase", std::move(args), kMotionTimeout);
}

void movePTPLineEefRelEef(Connection& c, const CartesianPose& delta, double velocity_mm_s) {
  auto args = pose_args(delta);
  args.push_back(velocity_mm_s);
  c.request("movePTPLineEefRelEef", std::move(args), kMotionTimeout);
}

void movePTPCirc1OrientationInterpolation(Connection& c, const CartesianPose& via_frame,
                                          const CartesianPose& end_frame, double velocity_mm_s) {
  auto args = pose_args(via_frame);
  auto end = pose_args(end_frame);
  args.insert(args.end(), end.begin(), end.end());
  args.push_back(velocity_mm_s);
  c.request("movePTPCirc1OrientationInterpolation", std::move(args), kMotionTimeout);
}

void movePTPArc_AC(Connection& c, const std::array<double, 3>& center_mm,
                   const std::array<double, 3>& normal, double radius_mm, double angle_rad,
                   double velocity_mm_s) {
  c.request("movePTPArc_AC",
            {center_mm[0], center_mm[1], center_mm[2], normal[0], normal[1], normal[2], radius_mm,
             angle_rad, velocity_mm_s},
            kMotionTimeout);
}

void movePTPArcXY_AC(Connection& c, double cx, double cy, double z, double radius_mm,
                     double angle_rad, double velocity_mm_s) {
  c.request("movePTPArcXY_AC", {cx, cy, z, radius_mm, angle_rad, velocity_mm_s}, kMotionTimeout);
}

void movePTPArcXZ_AC(Connection& c, double cx, double cz, double y, double radius_mm,
                     double angle_rad, double velocity_mm_s) {
  c.request("movePTPArcXZ_AC", {cx, cz, y, radius_mm, angle_rad, velocity_mm_s}, kMotionTimeout);
}

void movePTPArcYZ_AC(Connection& c, double cy, double cz, double x, double radius_mm,
                     double angle_rad, double velocity_mm_s) {
  c.request("movePTPArcYZ_AC", {cy, cz, x, radius_mm, angle_rad, velocity_mm_s}, kMotionTimeout);
}

// --- real-time control -------------------------------------------------

void realTime_startDirectServoJoints(Connection& c) {
  c.request("realTime_startDirectServoJoints");
  c.set_streaming(true);
}

void sendJointsPositions(Connection& c, const JointVector& jpos) {
  if (!c.streaming())
    throw KstError(Errc::bad_mode, "sendJointsPositions outside direct-servo mode");
  if (!c.geometry().within_limits(jpos))
    throw KstError(Errc::limit, "streamed joint target outside limits");
  c.send_frame("sendJointsPositions", {jpos.begin(), jpos.end()});
}

void realTime_stopDirectServoJoints(Connection& c) {
  c.request("realTime_stopDirectServoJoints");
  c.set_streaming(false);
}

void realTime_moveOnPathInJointSpace(Connection& c, const std::vector<JointVector>& path,
                                     double relative_velocity) {
  std::vector<double> args = {relative_velocity};
  for (const auto& q : path) args.insert(args.end(), q.begin(), q.end());
  c.request("realTime_moveOnPathInJointSpace", std::move(args), kMotionTimeout);
}

// --- setters ----------------------------------------------------------

void setBlueOn(Connection& c) { c.request("setBlueOn"); }
void setBlueOff(Connection& c) { c.request("setBlueOff"); }
void setPin1On(Connection& c) { c.request("setPin1On"); }
void setPin1Off(Connection& c) { c.request("setPin1Off"); }
void setPin2On(Connection& c) { c.request("setPin2On"); }
void setPin2Off(Connection& c) { c.request("setPin2Off"); }
void setPin11On(Connection& c) { c.request("setPin11On"); }
void setPin11Off(Connection& c) { c.request("setPin11Off"); }
void setPin12On(Connection& c) { c.request("setPin12On"); }
void setPin12Off(Connection& c) { c.request("setPin12Off"); }

void sendEEFPositions(Connection& c, const CartesianPose& pos) {
  c.request("sendEEFPositions", pose_args(pos));
}

CartesianPose getStoredEEFPositions(Connection& c) {
  const auto& p = expect_payload(c.request("getStoredEEFPositions"), 6, "getStoredEEFPositions");
  return {p[0], p[1], p[2], p[3], p[4], p[5]};
}

void sendJointsPositionsF(Connection& c, const CartesianPose& pos) {
  if (!c.streaming())
    throw KstError(Errc::bad_mode, "sendJointsPositionsF outside direct-servo mode");
  c.send_frame("sendJointsPositionsF", pose_args(pos));
}

// --- getters -------------------------------------------------------------

JointVector getJointsPos(Connection& c) {
  return joints_from(expect_payload(c.request("getJointsPos"), 7, "getJointsPos"));
}

CartesianPose getEEFPos(Connection& c) {
  const auto& p = expect_payload(c.request("getEEFPos"), 6, "getEEFPos");
  return {p[0], p[1], p[2], p[3], p[4], p[5]};
}

std::array<double, 3> getEEFCartesianPosition(Connection& c) {
  const auto& p = expect_payload(c.request("getEEFCartesianPosition"), 3, "getEEFCartesianPosition");
  return {p[0], p[1], p[2]};
}

std::array<double, 3> getEEFCartesianOrientation(Connection& c) {
  const auto& p =
      expect_payload(c.request("getEEFCartesianOrientation"), 3, "getEEFCartesianOrientation");
  return {p[0], p[1], p[2]};
}

Eigen::Vector3d getEEF_Force(Connection& c) {
  const auto& p = expect_payload(c.request("getEEF_Force"), 3, "getEEF_Force");
  return {p[0], p[1], p[2]};
}

Eigen::Vector3d getEEF_Moment(Connection& c) {
  const auto& p = expect_payload(c.request("getEEF_Moment"), 3, "getEEF_Moment");
  return {p[0], p[1], p[2]};
}

std::array<double, 7> getJointsExternalTorques(Connection& c) {
  return joints_from(expect_payload(c.request("getJointsExternalTorques"), 7, "torques"));
}

std::array<double, 7> getJointsMeasuredTorques(Connection& c) {
  return joints_from(expect_payload(c.request("getJointsMeasuredTorques"), 7, "torques"));
}

double getMeasuredTorqueAtJoint(Connection& c, int joint_1_based) {
  return expect_payload(c.request("getMeasuredTorqueAtJoint", {double(joint_1_based)}), 1,
                        "getMeasuredTorqueAtJoint")[0];
}

double getExternalTorqueAtJoint(Connection& c, int joint_1_based) {
  return expect_payload(c.request("getExternalTorqueAtJoint", {double(joint_1_based)}), 1,
                        "getExternalTorqueAtJoint")[0];
}

kin::RotationMatrix getEEFOrientationR(Connection& c) {
  const auto& p = expect_payload(c.request("getEEFOrientationR"), 9, "getEEFOrientationR");
  kin::RotationMatrix R;
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) R(r, col) = p[3 * r + col];
  return R;
}

Eigen::Vector4d getEEFOrientationQuat(Connection& c) {
  const auto& p = expect_payload(c.request("getEEFOrientationQuat"), 4, "getEEFOrientationQuat");
  return {p[0], p[1], p[2], p[3]};
}

namespace {
bool pin_state(Connection& c, const char* tag) {
  return expect_payload(c.request(tag), 1, tag)[0] == 1.0;
}
}  // namespace

bool getPin3State(Connection& c) { return pin_state(c, "getPin3State"); }
bool getPin4State(Connection& c) { return pin_state(c, "getPin4State"); }
bool getPin10State(Connection& c) { return pin_state(c, "getPin10State"); }
bool getPin13State(Connection& c) { return pin_state(c, "getPin13State"); }
bool getPin16State(Connection& c) { return pin_state(c, "getPin16State"); }

// --- physical interaction --------------------------------------------

void startHandGuiding(Connection& c) { c.request("startHandGuiding"); }

std::vector<TeachEvent> collectTeachEvents(Connection& c, std::chrono::milliseconds timeout) {
  std::vector<TeachEvent> events;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0)
      throw KstError(Errc::timeout, "hand-guiding session did not terminate in time");
    auto report = c.poll_report(left);
    if (!report) continue;
    if (report->tag == "handGuidingEnded") return events;
    if (report->tag == "teachPoint" && report->args.size() == 14) {
      TeachEvent ev;
      for (int i = 0; i < 7; ++i) ev.q[i] = report->args[i];
      ev.pose = {report->args[7], report->args[8], report->args[9], report->args[10],
                 report->args[11], report->args[12]};
      ev.stamp = report->args[13];
      events.push_back(ev);
    }
  }
}

void saveTeachPath(const std::string& path, const std::vector<TeachEvent>& events) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw KstError(Errc::io, "cannot open teach path file: " + path);
  for (const auto& ev : events) {
    nlohmann::json row;
    row["q"] = ev.q;
    row["pose"] = ev.pose.to_array();
    row["stamp"] = ev.stamp;
    out << row.dump() << '\n';
  }
}

std::vector<TeachEvent> loadTeachPath(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw KstError(Errc::io, "cannot open teach path file: " + path);
  std::vector<TeachEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = nlohmann::json::parse(line);
    TeachEvent ev;
    for (int i = 0; i < 7; ++i) ev.q[i] = row.at("q").at(i).get<double>();
    std::array<double, 6> pose{};
    for (int i = 0; i < 6; ++i) pose[i] = row.at("pose").at(i).get<double>();
    ev.pose = CartesianPose::from_array(pose);
    ev.stamp = row.value("stamp", 0.0);
    events.push_back(ev);
  }
  return events;
}

bool performEventFunctionAtDoubleHit(Connection& c, const std::function<void(double)>& on_hit,
                                     std::chrono::milliseconds timeout) {
  c.request("performEventFunctionAtDoubleHit", {1.0});
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  bool fired = false;
  while (!fired) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) break;
    auto report = c.poll_report(left);
    if (report && report->tag == "doubleHit") {
      fired = true;
      if (on_hit) on_hit(report->args.empty() ? 0.0 : report->args[0]);
    }
  }
  c.request("performEventFunctionAtDoubleHit", {0.0});
  return fired;
}

}  // namespace kst::client
