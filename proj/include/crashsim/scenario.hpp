#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crashsim/geometry.hpp"
#include "crashsim/rng.hpp"

namespace crashsim {

enum class Topology { kFourWay, kThreeWay };

// Compass approaches. The three-way map has no north leg (the stem enters
// from the south).
enum class Approach { kSouth = 0, kEast = 1, kNorth = 2, kWest = 3 };

enum class Maneuver { kStraight, kLeft, kRight };

enum class AgentClass { kCar, kVan, kTruck, kMotorcycle, kCyclist, kPedestrian };

enum class AgentRole {
  kAccident1,
  kAccident2,
  kFollower1,
  kFollower2,
  kBackground,
  kPedestrian,
};

// Twelve designed accident types (six conflict patterns, each in a
// signalized and an unsignalized variant) plus collision-free scenarios.
enum class ScenarioType {
  kSigRedLightStraight,    // 1: red-light runner vs crossing straight, four-way
  kSigRedLightLeft,        // 2: left turn against red light, four-way
  kSigUnprotectedLeft,     // 3: unprotected left vs oncoming straight, four-way
  kSigRightVsLeft,         // 4: right turn vs left turn merging, four-way
  kSigRightVsLeftTee,      // 5: right turn vs left turn merging, three-way
  kSigStraightVsRightTee,  // 6: straight vs right turn merging, three-way
  kUnsigRedLightStraight,
  kUnsigRedLightLeft,
  kUnsigUnprotectedLeft,
  kUnsigRightVsLeft,
  kUnsigRightVsLeftTee,
  kUnsigStraightVsRightTee,
  kNormal,
};

bool scenario_is_signalized(ScenarioType t);
bool scenario_is_accident(ScenarioType t);
Topology scenario_topology(ScenarioType t);
// Conflict pattern index 1..6 for accident types, 0 for normal.
int scenario_family(ScenarioType t);
std::string scenario_type_name(ScenarioType t);
ScenarioType scenario_type_from_name(const std::string& name);
std::vector<ScenarioType> all_scenario_types();

enum class LightPhase { kGreen, kYellow, kRed };

// Two-phase fixed-time program. Axis 0 covers the south/north approaches,
// axis 1 the east/west approaches.
struct LightProgram {
  double green = 10.0;
  double yellow = 3.0;
  double offset = 0.0;  // seed-chosen shift of the whole cycle, seconds

  double cycle() const { return 2.0 * (green + yellow); }
  LightPhase phase(int axis, double t) const;
};

int approach_axis(Approach a);

// Centerline path through the junction with per-waypoint arclength and
// target speed. Waypoint spacing stays below 2 m.
struct Trajectory {
  std::vector<Vec2> waypoints;
  std::vector<double> arclength;
  std::vector<double> target_speed;
  Approach approach = Approach::kSouth;
  Maneuver maneuver = Maneuver::kStraight;
  double stopline_s = 0.0;  // arclength of the signal stop line

  double length() const { return arclength.empty() ? 0.0 : arclength.back(); }
  Vec2 point_at(double s) const;
  double heading_at(double s) const;
  // Arclength of the path point nearest to pos, searched in
  // [s_hint, s_hint + window].
  double project(const Vec2& pos, double s_hint, double window) const;
};

struct Route {
  Approach approach;
  Maneuver maneuver;
  Trajectory trajectory;
};

struct IntersectionMap {
  Topology topology = Topology::kFourWay;
  bool signalized = false;
  uint64_t seed = 0;
  double lane_width = 3.5;
  double left_radius = 10.0;
  double right_radius = 6.0;
  double stopline_distance = 0.0;  // from junction center along an approach
  std::vector<Route> routes;
  std::vector<Polygon> buildings;
  std::optional<LightProgram> lights;

  const Route* find_route(Approach a, Maneuver m) const;
};

struct ScenarioConfig {
  ScenarioType type = ScenarioType::kNormal;
  uint64_t seed = 0;
  int n_background_vehicles = 3;
  int n_pedestrians = 2;
  // Maximum speed per accident vehicle; sampled from the seed when empty.
  std::vector<double> max_speeds;
  std::string weather_tag = "clear";     // metadata only
  std::string timeofday_tag = "noon";    // metadata only
  double duration_cap = 10.0;
};

struct SpawnAgent {
  int id = 0;
  AgentClass cls = AgentClass::kCar;
  AgentRole role = AgentRole::kBackground;
  double length = 4.5;
  double width = 1.9;
  Pose2 initial_pose;
  double initial_s = 0.0;
  double target_speed = 8.0;
  Trajectory trajectory;
};

struct InfrastructureRig {
  Pose2 pose;
  double mount_height = 4.0;  // meters, in [3, 5]
};

struct SpawnPlan {
  std::vector<SpawnAgent> agents;
  InfrastructureRig infrastructure;
  int ego_id = 0;
};

struct TrajectoryIntersection {
  Vec2 point;
  double s_a = 0.0;
  double s_b = 0.0;
};

struct ArrivalShifts {
  double shift_a = 0.0;
  double shift_b = 0.0;
};

IntersectionMap build_map(Topology topology, bool signalized, uint64_t seed);

// Throws std::invalid_argument when the maneuver does not exist for the
// approach on this topology.
Trajectory plan_trajectory(const IntersectionMap& map, Approach approach, Maneuver maneuver);

// First crossing (or closest-approach point when the paths merge or pass
// within 0.5 m); nullopt when the paths never come that close.
std::optional<TrajectoryIntersection> trajectory_intersection(const Trajectory& a,
                                                              const Trajectory& b);

// Start-position shifts (meters, >= 0, applied backward along each
// trajectory) equalizing the nominal arrival times s/v. The later arriver is
// left unchanged.
ArrivalShifts sync_arrival(double s_a, double s_b, double v_a, double v_b);

// Deterministic in (config, map). Throws std::runtime_error when a feasible
// non-overlapping spawn cannot be found within 100 attempts.
SpawnPlan spawn_scenario(const ScenarioConfig& config, const IntersectionMap& map);

struct SplitResult {
  std::vector<size_t> train;
  std::vector<size_t> val;
  std::vector<size_t> test;
  std::vector<std::string> warnings;
};

// Stratified 0.7/0.15/0.15 split over scenario indices grouped by type.
SplitResult split_dataset(const std::vector<ScenarioType>& types, uint64_t seed);

double agent_class_length(AgentClass c);
double agent_class_width(AgentClass c);
std::string agent_class_name(AgentClass c);
AgentClass agent_class_from_name(const std::string& name);
std::string agent_role_name(AgentRole r);
AgentRole agent_role_from_name(const std::string& name);

}  // namespace crashsim
