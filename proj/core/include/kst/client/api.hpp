#pragma once

#include <functional>
#include <vector>

#include "kst/client/connection.hpp"
#include "kst/kin/kinematics.hpp"

/// The toolbox function surface: one typed wrapper per controller command,
/// mirroring the MATLAB-style call signatures over a Connection handle.
/// Motion calls block until the controller reports completion.
namespace kst::client {

using kin::CartesianPose;
using kin::JointVector;

inline constexpr std::chrono::milliseconds kMotionTimeout = std::chrono::minutes(10);

// --- networking -------------------------------------------------------

/// Connects to "host" or "host:port" (default port 30001) and shakes hands.
Connection net_establishConnection(const std::string& address);
void net_turnOffServer(Connection& c);

// --- point-to-point motion ----------------------------------------------

void movePTPJointSpace(Connection& c, const JointVector& jpos, double relative_velocity);
void movePTPHomeJointSpace(Connection& c);
void movePTPTransportPositionJointSpace(Connection& c);
void movePTPLineEEF(Connection& c, const CartesianPose& pos, double velocity_mm_s);
void movePTPLineEefRelBase(Connection& c, const CartesianPose& delta, double velocity_mm_s);
void movePTPLineEefRelEef(Connection& c, const CartesianPose& delta, double velocity_mm_s);
void movePTPCirc1OrientationInterpolation(Connection& c, const CartesianPose& via_frame,
                                          const CartesianPose& end_frame, double velocity_mm_s);
void movePTPArc_AC(Connection& c, const std::array<double, 3>& center_mm,
                   const std::array<double, 3>& normal, double radius_mm, double angle_rad,
                   double velocity_mm_s);
void movePTPArcXY_AC(Connection& c, double cx, double cy, double z, double radius_mm,
                     double angle_rad, double velocity_mm_s);
void movePTPArcXZ_AC(Connection& c, double cx, double cz, double y, double radius_mm,
                     double angle_rad, double velocity_mm_s);
void movePTPArcYZ_AC(Connection& c, double cy, double cz, double x, double radius_mm,
                     double angle_rad, double velocity_mm_s);

// --- real-time control ----------------------------------------------------

void realTime_startDirectServoJoints(Connection& c);
/// Streams a joint target; fire-and-forget while the direct servo runs.
/// Validated locally against the joint limits (LIMIT) and the streaming
/// state (BAD_MODE) before anything is written to the wire.
void sendJointsPositions(Connection& c, const JointVector& jpos);
void realTime_stopDirectServoJoints(Connection& c);
/// Moves the robot through a sequence of configurations in one blocking call.
void realTime_moveOnPathInJointSpace(Connection& c, const std::vector<JointVector>& path,
                                     double relative_velocity);

// --- setters ---------------------------------------------------------------

void setBlueOn(Connection& c);
void setBlueOff(Connection& c);
void setPin1On(Connection& c);
void setPin1Off(Connection& c);
void setPin2On(Connection& c);
void setPin2Off(Connection& c);
void setPin11On(Connection& c);
void setPin11Off(Connection& c);
void setPin12On(Connection& c);
void setPin12Off(Connection& c);
/// Stores a Cartesian pose in controller memory (readable back with
/// getStoredEEFPositions).
void sendEEFPositions(Connection& c, const CartesianPose& pos);
CartesianPose getStoredEEFPositions(Connection& c);
/// Streams a Cartesian target; the controller resolves it through one IK
/// step while the direct servo runs. Fire-and-forget.
void sendJointsPositionsF(Connection& c, const CartesianPose& pos);

// --- getters ---------------------------------------------------------------

JointVector getJointsPos(Connection& c);
CartesianPose getEEFPos(Connection& c);
std::array<double, 3> getEEFCartesianPosition(Connection& c);
std::array<double, 3> getEEFCartesianOrientation(Connection& c);
Eigen::Vector3d getEEF_Force(Connection& c);
Eigen::Vector3d getEEF_Moment(Connection& c);
std::array<double, 7> getJointsExternalTorques(Connection& c);
std::array<double, 7> getJointsMeasuredTorques(Connection& c);
double getMeasuredTorqueAtJoint(Connection& c, int joint_1_based);
double getExternalTorqueAtJoint(Connection& c, int joint_1_based);
kin::RotationMatrix getEEFOrientationR(Connection& c);
/// Unit quaternion (w, x, y, z), w >= 0.
Eigen::Vector4d getEEFOrientationQuat(Connection& c);
bool getPin3State(Connection& c);
bool getPin4State(Connection& c);
bool getPin10State(Connection& c);
bool getPin13State(Connection& c);
bool getPin16State(Connection& c);

// --- physical interaction -------------------------------------------

struct TeachEvent {
  JointVector q{};
  CartesianPose pose;
  double stamp = 0;  // controller time, s
};

/// Enters hand-guiding mode (controller must be IDLE).
void startHandGuiding(Connection& c);
/// Collects teachPoint reports until the controller signals that the
/// hand-guiding session ended (green release after flicker). Throws
/// KstError(timeout) if no end marker arrives in time.
std::vector<TeachEvent> collectTeachEvents(Connection& c, std::chrono::milliseconds timeout);

/// Teach path files: JSONL, one {"q":[7],"pose":[6],"stamp":s} per line.
void saveTeachPath(const std::string& path, const std::vector<TeachEvent>& events);
std::vector<TeachEvent> loadTeachPath(const std::string& path);

/// Arms controller-side double-touch detection (two external-force spikes
/// within the configured window) and blocks until it fires or `timeout`
/// passes. Returns true and invokes `on_hit(stamp)` on detection.
bool performEventFunctionAtDoubleHit(Connection& c, const std::function<void(double)>& on_hit,
                                     std::chrono::milliseconds timeout);

}  // namespace kst::client
