#include "crashsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace crashsim {

namespace {

constexpr double kApproachLength = 100.0;
constexpr double kExitLength = 60.0;

struct TypeInfo {
  ScenarioType type;
  const char* name;
  bool signalized;
  Topology topology;
  int family;
};

const TypeInfo kTypeTable[] = {
    {ScenarioType::kSigRedLightStraight, "sig-red-light-straight", true, Topology::kFourWay, 1},
    {ScenarioType::kSigRedLightLeft, "sig-red-light-left", true, Topology::kFourWay, 2},
    {ScenarioType::kSigUnprotectedLeft, "sig-unprotected-left", true, Topology::kFourWay, 3},
    {ScenarioType::kSigRightVsLeft, "sig-right-vs-left", true, Topology::kFourWay, 4},
    {ScenarioType::kSigRightVsLeftTee, "sig-right-vs-left-tee", true, Topology::kThreeWay, 5},
    {ScenarioType::kSigStraightVsRightTee, "sig-straight-vs-right-tee", true, Topology::kThreeWay,
     6},
    {ScenarioType::kUnsigRedLightStraight, "unsig-red-light-straight", false, Topology::kFourWay,
     1},
    {ScenarioType::kUnsigRedLightLeft, "unsig-red-light-left", false, Topology::kFourWay, 2},
    {ScenarioType::kUnsigUnprotectedLeft, "unsig-unprotected-left", false, Topology::kFourWay, 3},
    {ScenarioType::kUnsigRightVsLeft, "unsig-right-vs-left", false, Topology::kFourWay, 4},
    {ScenarioType::kUnsigRightVsLeftTee, "unsig-right-vs-left-tee", false, Topology::kThreeWay, 5},
    {ScenarioType::kUnsigStraightVsRightTee, "unsig-straight-vs-right-tee", false,
     Topology::kThreeWay, 6},
    {ScenarioType::kNormal, "normal", false, Topology::kFourWay, 0},
};

const TypeInfo& type_info(ScenarioType t) {
  for (const auto& info : kTypeTable) {
    if (info.type == t) return info;
  }
  throw std::invalid_argument("unknown scenario type");
}

Vec2 rotate_quadrant(const Vec2& p, int k) { return p.rotated(k * kPi / 2.0); }

void append_point(Trajectory& traj, const Vec2& p) {
  if (!traj.waypoints.empty()) {
    const double d = (p - traj.waypoints.back()).norm();
    if (d < 1e-6) return;
    traj.arclength.push_back(traj.arclength.back() + d);
  } else {
    traj.arclength.push_back(0.0);
  }
  traj.waypoints.push_back(p);
}

void append_straight(Trajectory& traj, const Vec2& from, const Vec2& to, double step) {
  const double len = (to - from).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    append_point(traj, from + (to - from) * (static_cast<double>(i) / n));
  }
}

void append_arc(Trajectory& traj, const Vec2& center, double radius, double theta0, double theta1) {
  const double arc_len = std::abs(theta1 - theta0) * radius;
  const int n = std::max(2, static_cast<int>(std::ceil(arc_len / 0.5)));
  for (int i = 0; i <= n; ++i) {
    const double th = theta0 + (theta1 - theta0) * (static_cast<double>(i) / n);
    append_point(traj, center + Vec2(std::cos(th), std::sin(th)) * radius);
  }
}

// Canonical route for the south approach (heading +y, incoming lane at
// x = +lane_width/2); other approaches are 90-degree rotations of it.
Trajectory canonical_route(Maneuver m, double e, double left_r, double right_r, double stop_d) {
  Trajectory traj;
  traj.maneuver = m;
  const double y0 = -(stop_d + kApproachLength);
  switch (m) {
    case Maneuver::kStraight:
      append_straight(traj, {e, y0}, {e, stop_d + kExitLength}, 1.0);
      break;
    case Maneuver::kLeft: {
      const double R = left_r;
      append_straight(traj, {e, y0}, {e, e - R}, 1.0);
      append_arc(traj, {e - R, e - R}, R, 0.0, kPi / 2.0);
      append_straight(traj, {e - R, e}, {-(stop_d + kExitLength), e}, 1.0);
      break;
    }
    case Maneuver::kRight: {
      const double r = right_r;
      append_straight(traj, {e, y0}, {e, -e - r}, 1.0);
      append_arc(traj, {e + r, -e - r}, r, kPi, kPi / 2.0);
      append_straight(traj, {e + r, -e}, {stop_d + kExitLength, -e}, 1.0);
      break;
    }
  }
  traj.stopline_s = kApproachLength;
  return traj;
}

Trajectory rotate_route(const Trajectory& canonical, int k) {
  Trajectory traj = canonical;
  for (auto& p : traj.waypoints) p = rotate_quadrant(p, k);
  return traj;
}

bool route_valid(Topology topo, Approach a, Maneuver m) {
  if (topo == Topology::kFourWay) return true;
  switch (a) {
    case Approach::kSouth:
      return m != Maneuver::kStraight;
    case Approach::kEast:
      return m != Maneuver::kRight;
    case Approach::kWest:
      return m != Maneuver::kLeft;
    case Approach::kNorth:
      return false;
  }
  return false;
}

struct ConflictRoutes {
  Approach approach_a;
  Maneuver maneuver_a;
  Approach approach_b;
  Maneuver maneuver_b;
};

ConflictRoutes family_routes(int family) {
  switch (family) {
    case 1:
      return {Approach::kSouth, Maneuver::kStraight, Approach::kWest, Maneuver::kStraight};
    case 2:
      return {Approach::kSouth, Maneuver::kLeft, Approach::kWest, Maneuver::kStraight};
    case 3:
      return {Approach::kSouth, Maneuver::kLeft, Approach::kNorth, Maneuver::kStraight};
    case 4:
      return {Approach::kSouth, Maneuver::kRight, Approach::kNorth, Maneuver::kLeft};
    case 5:
      return {Approach::kWest, Maneuver::kRight, Approach::kEast, Maneuver::kLeft};
    case 6:
      return {Approach::kWest, Maneuver::kStraight, Approach::kSouth, Maneuver::kRight};
    default:
      throw std::invalid_argument("family_routes: not an accident family");
  }
}

}  // namespace

bool scenario_is_signalized(ScenarioType t) { return type_info(t).signalized; }
bool scenario_is_accident(ScenarioType t) { return type_info(t).family != 0; }
Topology scenario_topology(ScenarioType t) { return type_info(t).topology; }
int scenario_family(ScenarioType t) { return type_info(t).family; }
std::string scenario_type_name(ScenarioType t) { return type_info(t).name; }

ScenarioType scenario_type_from_name(const std::string& name) {
  for (const auto& info : kTypeTable) {
    if (name == info.name) return info.type;
  }
  throw std::invalid_argument("unknown scenario type name: " + name);
}

std::vector<ScenarioType> all_scenario_types() {
  std::vector<ScenarioType> out;
  for (const auto& info : kTypeTable) out.push_back(info.type);
  return out;
}

LightPhase LightProgram::phase(int axis, double t) const {
  // Axis 0: green, yellow, then red while axis 1 runs its green+yellow.
  double u = std::fmod(t + offset, cycle());
  if (u < 0) u += cycle();
  if (axis == 1) u = std::fmod(u + green + yellow, cycle());
  if (u < green) return LightPhase::kGreen;
  if (u < green + yellow) return LightPhase::kYellow;
  return LightPhase::kRed;
}

int approach_axis(Approach a) {
  return (a == Approach::kSouth || a == Approach::kNorth) ? 0 : 1;
}

Vec2 Trajectory::point_at(double s) const {
  if (waypoints.empty()) return {};
  if (s <= 0.0) return waypoints.front();
  if (s >= arclength.back()) return waypoints.back();
  const auto it = std::upper_bound(arclength.begin(), arclength.end(), s);
  const size_t i = static_cast<size_t>(it - arclength.begin());
  const double s0 = arclength[i - 1], s1 = arclength[i];
  const double t = (s - s0) / (s1 - s0);
  return waypoints[i - 1] + (waypoints[i] - waypoints[i - 1]) * t;
}

double Trajectory::heading_at(double s) const {
  if (waypoints.size() < 2) return 0.0;
  size_t i;
  if (s <= 0.0) {
    i = 1;
  } else if (s >= arclength.back()) {
    i = waypoints.size() - 1;
  } else {
    i = static_cast<size_t>(std::upper_bound(arclength.begin(), arclength.end(), s) -
                            arclength.begin());
  }
  const Vec2 d = waypoints[i] - waypoints[i - 1];
  return std::atan2(d.y, d.x);
}

double Trajectory::project(const Vec2& pos, double s_hint, double window) const {
  const double s_lo = std::max(0.0, s_hint);
  const double s_hi = std::min(length(), s_hint + window);
  double best_s = s_lo;
  double best_d = std::numeric_limits<double>::infinity();
  for (double s = s_lo; s <= s_hi + 1e-9; s += 0.1) {
    const double d = (point_at(s) - pos).squared_norm();
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  return best_s;
}

const Route* IntersectionMap::find_route(Approach a, Maneuver m) const {
  for (const auto& r : routes) {
    if (r.approach == a && r.maneuver == m) return &r;
  }
  return nullptr;
}

IntersectionMap build_map(Topology topology, bool signalized, uint64_t seed) {
  IntersectionMap map;
  map.topology = topology;
  map.signalized = signalized;
  map.seed = seed;
  Rng rng(seed ^ 0x6d61705f736565d5ULL);

  const double e = map.lane_width / 2.0;
  map.left_radius = rng.uniform(8.0, 12.0);
  map.right_radius = rng.uniform(5.0, 7.0);
  map.stopline_distance = std::max(map.left_radius - e, map.right_radius + e) + 1.0;

  Trajectory canon[3] = {
      canonical_route(Maneuver::kStraight, e, map.left_radius, map.right_radius,
                      map.stopline_distance),
      canonical_route(Maneuver::kLeft, e, map.left_radius, map.right_radius,
                      map.stopline_distance),
      canonical_route(Maneuver::kRight, e, map.left_radius, map.right_radius,
                      map.stopline_distance),
  };
  for (int k = 0; k < 4; ++k) {
    const auto approach = static_cast<Approach>(k);
    for (const auto& c : canon) {
      if (!route_valid(topology, approach, c.maneuver)) continue;
      Route route;
      route.approach = approach;
      route.maneuver = c.maneuver;
      route.trajectory = rotate_route(c, k);
      route.trajectory.approach = approach;
      map.routes.push_back(std::move(route));
    }
  }

  // Corner buildings provide the occlusion situations; they sit behind a
  // setback so no lane or turn arc touches them.
  const int n_buildings = static_cast<int>(rng.uniform_int(5));
  std::array<int, 4> quadrants = {0, 1, 2, 3};
  for (int i = 3; i > 0; --i) {
    std::swap(quadrants[i], quadrants[rng.uniform_int(static_cast<uint64_t>(i + 1))]);
  }
  for (int i = 0; i < n_buildings; ++i) {
    const int q = quadrants[i];
    const double inner = 8.5;
    const double size = rng.uniform(10.0, 16.0);
    std::vector<Vec2> corners = {{inner, inner},
                                 {inner + size, inner},
                                 {inner + size, inner + size},
                                 {inner, inner + size}};
    for (auto& c : corners) c = rotate_quadrant(c, q);
    map.buildings.emplace_back(std::move(corners));
  }

  if (signalized) {
    LightProgram program;
    program.offset = rng.uniform(0.0, program.cycle());
    map.lights = program;
  }
  return map;
}

Trajectory plan_trajectory(const IntersectionMap& map, Approach approach, Maneuver maneuver) {
  const Route* route = map.find_route(approach, maneuver);
  if (route == nullptr) {
    throw std::invalid_argument("plan_trajectory: maneuver not available for approach");
  }
  return route->trajectory;
}

std::optional<TrajectoryIntersection> trajectory_intersection(const Trajectory& a,
                                                              const Trajectory& b) {
  double best_gap = std::numeric_limits<double>::infinity();
  TrajectoryIntersection closest{};
  for (size_t i = 0; i + 1 < a.waypoints.size(); ++i) {
    const Vec2& a0 = a.waypoints[i];
    const Vec2& a1 = a.waypoints[i + 1];
    for (size_t j = 0; j + 1 < b.waypoints.size(); ++j) {
      const Vec2& b0 = b.waypoints[j];
      const Vec2& b1 = b.waypoints[j + 1];
      if (const auto p = segment_intersection_point(a0, a1, b0, b1)) {
        return TrajectoryIntersection{*p, a.arclength[i] + (*p - a0).norm(),
                                      b.arclength[j] + (*p - b0).norm()};
      }
      const double d = segment_segment_distance(a0, a1, b0, b1);
      if (d < best_gap) {
        best_gap = d;
        // Closest-approach surrogate: midpoint of the segment midpoints is
        // good enough at sub-0.5 m gaps.
        const Vec2 mid = ((a0 + a1) * 0.5 + (b0 + b1) * 0.5) * 0.5;
        closest = {mid, a.arclength[i] + (mid - a0).norm(), b.arclength[j] + (mid - b0).norm()};
      }
    }
  }
  if (best_gap < 0.5) return closest;
  return std::nullopt;
}

ArrivalShifts sync_arrival(double s_a, double s_b, double v_a, double v_b) {
  if (!(v_a > 0.0) || !(v_b > 0.0)) {
    throw std::invalid_argument("sync_arrival: speeds must be positive");
  }
  const double t_a = s_a / v_a;
  const double t_b = s_b / v_b;
  if (t_a < t_b) return {v_a * (t_b - t_a), 0.0};
  return {0.0, v_b * (t_a - t_b)};
}

namespace {

OrientedBox agent_box(const SpawnAgent& a) {
  return OrientedBox(a.initial_pose, a.length, a.width);
}

bool spawn_conflicts(const SpawnAgent& candidate, const std::vector<SpawnAgent>& others) {
  const OrientedBox cand(candidate.initial_pose,
                         candidate.length + 3.0, candidate.width + 1.0);
  for (const auto& o : others) {
    if (obb_overlap(cand, agent_box(o))) return true;
  }
  return false;
}

SpawnAgent make_vehicle(int id, AgentClass cls, AgentRole role, const Trajectory& traj, double s0,
                        double speed) {
  SpawnAgent a;
  a.id = id;
  a.cls = cls;
  a.role = role;
  a.length = agent_class_length(cls);
  a.width = agent_class_width(cls);
  a.trajectory = traj;
  a.trajectory.target_speed.assign(a.trajectory.waypoints.size(), speed);
  a.initial_s = s0;
  a.target_speed = speed;
  a.initial_pose = Pose2(traj.point_at(s0).x, traj.point_at(s0).y, traj.heading_at(s0));
  return a;
}

AgentClass sample_accident_class(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.6) return AgentClass::kCar;
  if (u < 0.8) return AgentClass::kVan;
  return AgentClass::kTruck;
}

AgentClass sample_background_class(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.5) return AgentClass::kCar;
  if (u < 0.65) return AgentClass::kVan;
  if (u < 0.75) return AgentClass::kTruck;
  if (u < 0.9) return AgentClass::kMotorcycle;
  return AgentClass::kCyclist;
}

}  // namespace

SpawnPlan spawn_scenario(const ScenarioConfig& config, const IntersectionMap& map) {
  if (scenario_is_accident(config.type) && scenario_topology(config.type) != map.topology) {
    throw std::invalid_argument("spawn_scenario: map topology does not match scenario type");
  }
  Rng rng(config.seed ^ 0x7370617776f1ab3cULL);
  SpawnPlan plan;
  int next_id = 1;

  std::vector<std::pair<Approach, Maneuver>> reserved_routes;

  if (scenario_is_accident(config.type)) {
    const ConflictRoutes cr = family_routes(scenario_family(config.type));
    const Trajectory traj_a = plan_trajectory(map, cr.approach_a, cr.maneuver_a);
    const Trajectory traj_b = plan_trajectory(map, cr.approach_b, cr.maneuver_b);
    const auto conflict = trajectory_intersection(traj_a, traj_b);
    if (!conflict) throw std::runtime_error("spawn_scenario: conflict routes do not intersect");

    double v_a = config.max_speeds.size() >= 1 ? config.max_speeds[0] : rng.uniform(6.0, 12.0);
    double v_b = config.max_speeds.size() >= 2 ? config.max_speeds[1] : rng.uniform(6.0, 12.0);

    double s0_a = 0.0, s0_b = 0.0;
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const double t_a = rng.uniform(4.5, 7.0);
      const double t_b = rng.uniform(4.5, 7.0);
      const ArrivalShifts shifts = sync_arrival(v_a * t_a, v_b * t_b, v_a, v_b);
      s0_a = conflict->s_a - (v_a * t_a + shifts.shift_a);
      s0_b = conflict->s_b - (v_b * t_b + shifts.shift_b);
      placed = s0_a >= 17.0 && s0_b >= 17.0;
    }
    if (!placed) throw std::runtime_error("spawn_scenario: could not place accident vehicles");

    plan.agents.push_back(make_vehicle(next_id++, sample_accident_class(rng),
                                       AgentRole::kAccident1, traj_a, s0_a, v_a));
    plan.agents.push_back(make_vehicle(next_id++, sample_accident_class(rng),
                                       AgentRole::kAccident2, traj_b, s0_b, v_b));
    // Followers share the accident vehicles' trajectories, trailing 8-15 m.
    const double gap_a = rng.uniform(8.0, 15.0);
    const double gap_b = rng.uniform(8.0, 15.0);
    plan.agents.push_back(make_vehicle(next_id++, sample_accident_class(rng),
                                       AgentRole::kFollower1, traj_a, s0_a - gap_a, v_a));
    plan.agents.push_back(make_vehicle(next_id++, sample_accident_class(rng),
                                       AgentRole::kFollower2, traj_b, s0_b - gap_b, v_b));
    plan.ego_id = plan.agents[0].id;
    reserved_routes = {{cr.approach_a, cr.maneuver_a}, {cr.approach_b, cr.maneuver_b}};
  } else {
    // Normal scenario: a designated ego vehicle on a random route.
    const auto& route = map.routes[rng.uniform_int(map.routes.size())];
    const double speed = rng.uniform(6.0, 10.0);
    const double s0 = rng.uniform(30.0, 60.0);
    plan.agents.push_back(
        make_vehicle(next_id++, sample_accident_class(rng), AgentRole::kBackground,
                     route.trajectory, s0, speed));
    plan.ego_id = plan.agents[0].id;
  }

  for (int i = 0; i < config.n_background_vehicles; ++i) {
    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      const auto& route = map.routes[rng.uniform_int(map.routes.size())];
      const bool reserved =
          std::any_of(reserved_routes.begin(), reserved_routes.end(), [&](const auto& rm) {
            return rm.first == route.approach && rm.second == route.maneuver;
          });
      if (reserved) continue;
      const AgentClass cls = sample_background_class(rng);
      const double speed =
          cls == AgentClass::kCyclist ? rng.uniform(3.0, 5.0) : rng.uniform(4.0, 9.0);
      const double s0 = rng.uniform(5.0, kApproachLength - 5.0);
      SpawnAgent cand =
          make_vehicle(next_id, cls, AgentRole::kBackground, route.trajectory, s0, speed);
      if (spawn_conflicts(cand, plan.agents)) continue;
      plan.agents.push_back(std::move(cand));
      ++next_id;
      done = true;
    }
    if (!done) throw std::runtime_error("spawn_scenario: could not place background vehicle");
  }

  // Pedestrians cross the legs on crosswalks just outside the junction.
  std::vector<int> ped_quadrants;
  for (int k = 0; k < 4; ++k) {
    if (map.topology == Topology::kFourWay || k != static_cast<int>(Approach::kNorth)) {
      ped_quadrants.push_back(k);
    }
  }
  for (int i = 0; i < config.n_pedestrians; ++i) {
    const int k = ped_quadrants[rng.uniform_int(ped_quadrants.size())];
    // Stagger the crossing lines per pedestrian so two pedestrians sharing a
    // leg walk parallel lines that never intersect.
    const double cross_y = -(map.stopline_distance + 1.5 + 2.5 * i);
    const double half = map.lane_width + 1.0;
    Vec2 from(half, cross_y), to(-half, cross_y);
    if (rng.uniform() < 0.5) std::swap(from, to);
    Trajectory traj;
    append_straight(traj, rotate_quadrant(from, k), rotate_quadrant(to, k), 1.0);
    const double speed = rng.uniform(1.2, 1.8);
    traj.target_speed.assign(traj.waypoints.size(), speed);
    SpawnAgent ped;
    ped.id = next_id++;
    ped.cls = AgentClass::kPedestrian;
    ped.role = AgentRole::kPedestrian;
    ped.length = agent_class_length(AgentClass::kPedestrian);
    ped.width = agent_class_width(AgentClass::kPedestrian);
    ped.trajectory = std::move(traj);
    ped.initial_s = rng.uniform(0.0, 2.0);
    ped.target_speed = speed;
    ped.initial_pose = Pose2(ped.trajectory.point_at(ped.initial_s).x,
                             ped.trajectory.point_at(ped.initial_s).y,
                             ped.trajectory.heading_at(ped.initial_s));
    plan.agents.push_back(std::move(ped));
  }

  // Infrastructure rig on a seeded corner, facing the junction center.
  {
    const int q = static_cast<int>(rng.uniform_int(4));
    const Vec2 pos = rotate_quadrant({7.0, 7.0}, q);
    plan.infrastructure.pose = Pose2(pos.x, pos.y, std::atan2(-pos.y, -pos.x));
    plan.infrastructure.mount_height = rng.uniform(3.0, 5.0);
  }
  return plan;
}

SplitResult split_dataset(const std::vector<ScenarioType>& types, uint64_t seed) {
  SplitResult result;
  const double ratios[3] = {0.7, 0.15, 0.15};
  std::map<ScenarioType, std::vector<size_t>> groups;
  for (size_t i = 0; i < types.size(); ++i) groups[types[i]].push_back(i);

  std::vector<std::vector<size_t>> allocatable;
  std::vector<size_t> leftover;
  for (auto& [type, ids] : groups) {
    if (ids.size() < 3) {
      result.warnings.push_back("type " + scenario_type_name(type) +
                                " has fewer scenarios than splits; left unstratified");
      leftover.insert(leftover.end(), ids.begin(), ids.end());
    } else {
      allocatable.push_back(ids);
    }
  }
  if (!leftover.empty()) allocatable.push_back(leftover);

  Rng rng(seed ^ 0x73706c69745f73ddULL);
  std::vector<size_t>* const splits[3] = {&result.train, &result.val, &result.test};
  for (auto& ids : allocatable) {
    for (size_t i = ids.size(); i > 1; --i) {
      std::swap(ids[i - 1], ids[rng.uniform_int(i)]);
    }
    const size_t n = ids.size();
    size_t counts[3];
    double fracs[3];
    size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
      const double exact = n * ratios[s];
      counts[s] = static_cast<size_t>(std::floor(exact));
      fracs[s] = exact - static_cast<double>(counts[s]);
      assigned += counts[s];
    }
    // Largest remainder; ties go to the earlier split.
    while (assigned < n) {
      int best = 0;
      for (int s = 1; s < 3; ++s) {
        if (fracs[s] > fracs[best] + 1e-12) best = s;
      }
      ++counts[best];
      fracs[best] = -1.0;
      ++assigned;
    }
    // Stratification floor: every split non-empty when the group allows it.
    if (n >= 3) {
      for (int s = 0; s < 3; ++s) {
        if (counts[s] == 0) {
          int donor = 0;
          for (int d = 1; d < 3; ++d) {
            if (counts[d] > counts[donor]) donor = d;
          }
          --counts[donor];
          ++counts[s];
        }
      }
    }
    size_t idx = 0;
    for (int s = 0; s < 3; ++s) {
      for (size_t c = 0; c < counts[s]; ++c) splits[s]->push_back(ids[idx++]);
    }
  }
  for (auto* split : splits) std::sort(split->begin(), split->end());
  return result;
}

double agent_class_length(AgentClass c) {
  switch (c) {
    case AgentClass::kCar: return 4.5;
    case AgentClass::kVan: return 5.2;
    case AgentClass::kTruck: return 7.5;
    case AgentClass::kMotorcycle: return 2.2;
    case AgentClass::kCyclist: return 1.8;
    case AgentClass::kPedestrian: return 0.5;
  }
  return 4.5;
}

double agent_class_width(AgentClass c) {
  switch (c) {
    case AgentClass::kCar: return 1.9;
    case AgentClass::kVan: return 2.0;
    case AgentClass::kTruck: return 2.5;
    case AgentClass::kMotorcycle: return 0.8;
    case AgentClass::kCyclist: return 0.6;
    case AgentClass::kPedestrian: return 0.5;
  }
  return 1.9;
}

std::string agent_class_name(AgentClass c) {
  switch (c) {
    case AgentClass::kCar: return "car";
    case AgentClass::kVan: return "van";
    case AgentClass::kTruck: return "truck";
    case AgentClass::kMotorcycle: return "motorcycle";
    case AgentClass::kCyclist: return "cyclist";
    case AgentClass::kPedestrian: return "pedestrian";
  }
  return "car";
}

AgentClass agent_class_from_name(const std::string& name) {
  for (const AgentClass c : {AgentClass::kCar, AgentClass::kVan, AgentClass::kTruck,
                             AgentClass::kMotorcycle, AgentClass::kCyclist,
                             AgentClass::kPedestrian}) {
    if (agent_class_name(c) == name) return c;
  }
  throw std::invalid_argument("unknown agent class: " + name);
}

std::string agent_role_name(AgentRole r) {
  switch (r) {
    case AgentRole::kAccident1: return "accident-1";
    case AgentRole::kAccident2: return "accident-2";
    case AgentRole::kFollower1: return "follower-1";
    case AgentRole::kFollower2: return "follower-2";
    case AgentRole::kBackground: return "background";
    case AgentRole::kPedestrian: return "pedestrian";
  }
  return "background";
}

AgentRole agent_role_from_name(const std::string& name) {
  for (const AgentRole r : {AgentRole::kAccident1, AgentRole::kAccident2, AgentRole::kFollower1,
                            AgentRole::kFollower2, AgentRole::kBackground,
                            AgentRole::kPedestrian}) {
    if (agent_role_name(r) == name) return r;
  }
  throw std::invalid_argument("unknown agent role: " + name);
}

}  // namespace crashsim
