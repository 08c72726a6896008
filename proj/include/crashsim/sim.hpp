#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crashsim/geometry.hpp"
#include "crashsim/scenario.hpp"

namespace crashsim {

constexpr double kSimDt = 0.1;  // 10 Hz
constexpr double kMaxAccel = 3.0;
constexpr double kMaxBrake = 6.0;

struct AgentState {
  int id = 0;
  AgentClass cls = AgentClass::kCar;
  AgentRole role = AgentRole::kBackground;
  Pose2 pose;
  double speed = 0.0;
  double length = 4.5;
  double width = 1.9;
  double s = 0.0;  // trajectory progress, meters

  OrientedBox box() const { return OrientedBox(pose, length, width); }
};

struct Frame {
  double t = 0.0;
  std::vector<AgentState> agents;
};

enum class TerminationReason { kCollision, kTrajectoryComplete, kTimeout };

struct CollisionRecord {
  int id_a = 0;
  int id_b = 0;  // id_a < id_b
  Vec2 contact;
  double t = 0.0;
};

struct ScenarioLog {
  ScenarioConfig config;
  std::string map_digest;
  // Static per-agent data mirrored from the spawn plan.
  std::vector<SpawnAgent> agent_info;  // trajectories omitted on (de)serialization
  InfrastructureRig infrastructure;
  int ego_id = 0;
  std::vector<Frame> frames;
  std::optional<CollisionRecord> collision;
  TerminationReason termination = TerminationReason::kTimeout;

  const Frame& frame_at(size_t k) const { return frames.at(k); }
  std::optional<AgentState> agent_in_frame(size_t k, int id) const;
};

std::string termination_reason_name(TerminationReason r);
TerminationReason termination_reason_from_name(const std::string& name);

struct ControlCommand {
  double accel = 0.0;     // m/s^2
  double yaw_rate = 0.0;  // rad/s
};

// Pure-pursuit steering plus the longitudinal rules (target-speed tracking,
// 1.5 s headway braking, red-light stop for non-accident roles).
ControlCommand controller_update(const AgentState& agent, const SpawnAgent& info,
                                 const Frame& frame,
                                 const std::vector<SpawnAgent>& all_info,
                                 const IntersectionMap& map, double t);

Frame step(const Frame& frame, const std::vector<SpawnAgent>& info, const IntersectionMap& map);

// First overlapping pair in ascending (id_a, id_b) order. Pedestrian pairs
// are ignored.
std::optional<CollisionRecord> detect_collision(const Frame& frame);

ScenarioLog run_scenario(const SpawnPlan& plan, const ScenarioConfig& config,
                         const IntersectionMap& map);

}  // namespace crashsim
