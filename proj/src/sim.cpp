#include "crashsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace crashsim {

std::optional<AgentState> ScenarioLog::agent_in_frame(size_t k, int id) const {
  for (const auto& a : frames.at(k).agents) {
    if (a.id == id) return a;
  }
  return std::nullopt;
}

std::string termination_reason_name(TerminationReason r) {
  switch (r) {
    case TerminationReason::kCollision: return "collision";
    case TerminationReason::kTrajectoryComplete: return "trajectory-complete";
    case TerminationReason::kTimeout: return "timeout";
  }
  return "timeout";
}

TerminationReason termination_reason_from_name(const std::string& name) {
  if (name == "collision") return TerminationReason::kCollision;
  if (name == "trajectory-complete") return TerminationReason::kTrajectoryComplete;
  if (name == "timeout") return TerminationReason::kTimeout;
  throw std::invalid_argument("unknown termination reason: " + name);
}

namespace {

bool is_vehicle(const AgentState& a) { return a.cls != AgentClass::kPedestrian; }

bool is_accident_role(AgentRole r) {
  return r == AgentRole::kAccident1 || r == AgentRole::kAccident2;
}

bool same_route(const SpawnAgent& a, const SpawnAgent& b) {
  return a.trajectory.approach == b.trajectory.approach &&
         a.trajectory.maneuver == b.trajectory.maneuver;
}

// Distance along the agent's own path to the nearest agent blocking it, if
// any, plus that agent's speed.
struct Leader {
  double gap = 0.0;  // bumper gap, meters
  double speed = 0.0;
};

std::optional<Leader> find_leader(const AgentState& agent, const SpawnAgent& info,
                                  const Frame& frame,
                                  const std::vector<SpawnAgent>& all_info) {
  std::unordered_map<int, const SpawnAgent*> info_by_id;
  for (const auto& i : all_info) info_by_id[i.id] = &i;
  const bool accident = is_accident_role(agent.role);
  std::optional<Leader> best;
  const double lookahead = std::max(8.0, agent.speed * 1.5 + 10.0);
  for (const auto& other : frame.agents) {
    if (other.id == agent.id) continue;
    const SpawnAgent* other_info = info_by_id.count(other.id) ? info_by_id.at(other.id) : nullptr;
    if (accident) {
      // Accident vehicles only yield to leaders on their own route; the
      // conflicting partner and crossing traffic are deliberately ignored.
      if (other_info == nullptr || other.cls == AgentClass::kPedestrian) continue;
      if (!same_route(info, *other_info)) continue;
      if (other.s <= agent.s) continue;
      const double gap = other.s - agent.s - 0.5 * (agent.length + other.length);
      Leader leader{gap, other.speed};
      if (!best || gap < best->gap) best = leader;
      continue;
    }
    // Generic rule: anything close to my path ahead of me is a leader.
    bool found = false;
    for (double ds = 1.0; ds <= lookahead && !found; ds += 1.0) {
      const Vec2 p = info.trajectory.point_at(agent.s + ds);
      if ((p - other.pose.position()).norm() < 1.5) {
        const double gap = ds - 0.5 * (agent.length + other.length);
        Leader leader{gap, other.speed};
        if (!best || gap < best->gap) best = leader;
        found = true;
      }
    }
  }
  return best;
}

}  // namespace

ControlCommand controller_update(const AgentState& agent, const SpawnAgent& info,
                                 const Frame& frame,
                                 const std::vector<SpawnAgent>& all_info,
                                 const IntersectionMap& map, double t) {
  ControlCommand cmd;
  const Trajectory& traj = info.trajectory;
  if (agent.cls == AgentClass::kPedestrian) return cmd;

  // Pure-pursuit steering toward a speed-scaled lookahead point.
  const double lookahead = std::clamp(2.0 + 0.6 * agent.speed, 3.0, 10.0);
  const Vec2 target = traj.point_at(std::min(agent.s + lookahead, traj.length()));
  const Vec2 to_target = target - agent.pose.position();
  if (to_target.norm() > 0.5) {
    const double alpha = normalize_angle(std::atan2(to_target.y, to_target.x) - agent.pose.yaw);
    const double curvature = 2.0 * std::sin(alpha) / lookahead;
    cmd.yaw_rate = std::clamp(agent.speed * curvature, -2.0, 2.0);
  }

  // Longitudinal: track the target speed, stop at the path end.
  const double remaining = traj.length() - agent.s;
  double desired = info.target_speed;
  if (remaining < 1.0) desired = 0.0;
  cmd.accel = agent.speed < desired ? kMaxAccel : -std::min(kMaxBrake, 2.0 * (agent.speed - desired));

  // Headway rule: brake hard when a leader is within the 1.5 s envelope.
  if (const auto leader = find_leader(agent, info, frame, all_info)) {
    if (leader->gap < std::max(2.0, agent.speed * 1.5) && leader->speed < agent.speed + 0.5) {
      cmd.accel = -kMaxBrake;
    }
  }

  // Red-light rule. Accident-role vehicles deliberately run the light.
  if (map.signalized && map.lights && !is_accident_role(agent.role) && agent.s < traj.stopline_s) {
    const LightPhase phase = map.lights->phase(approach_axis(traj.approach), t);
    if (phase != LightPhase::kGreen) {
      const double dist = traj.stopline_s - agent.s;
      const double margin = std::max(dist - 1.0, 0.3);
      const double required = agent.speed * agent.speed / (2.0 * margin);
      if (dist < 3.0 || required > 1.0) {
        cmd.accel = std::min(cmd.accel, -std::min(required, kMaxBrake));
      }
      if (dist < 3.0 && agent.speed < 1.0) cmd.accel = -kMaxBrake;
    }
  }
  return cmd;
}

Frame step(const Frame& frame, const std::vector<SpawnAgent>& info, const IntersectionMap& map) {
  std::unordered_map<int, const SpawnAgent*> info_by_id;
  for (const auto& i : info) info_by_id[i.id] = &i;
  Frame next;
  next.t = frame.t + kSimDt;
  next.agents.reserve(frame.agents.size());
  for (const auto& agent : frame.agents) {
    const SpawnAgent& ai = *info_by_id.at(agent.id);
    AgentState out = agent;
    if (agent.cls == AgentClass::kPedestrian) {
      // Constant-speed polyline walker; stops at the far curb.
      out.s = std::min(agent.s + agent.speed * kSimDt, ai.trajectory.length());
      const Vec2 p = ai.trajectory.point_at(out.s);
      out.pose = Pose2(p.x, p.y, ai.trajectory.heading_at(out.s));
      if (out.s >= ai.trajectory.length()) out.speed = 0.0;
    } else {
      const ControlCommand cmd = controller_update(agent, ai, frame, info, map, frame.t);
      out.speed = std::clamp(agent.speed + cmd.accel * kSimDt, 0.0, ai.target_speed);
      const Vec2 dir = agent.pose.heading();
      out.pose = Pose2(agent.pose.x + out.speed * kSimDt * dir.x,
                       agent.pose.y + out.speed * kSimDt * dir.y,
                       agent.pose.yaw + cmd.yaw_rate * kSimDt);
      out.s = ai.trajectory.project(out.pose.position(), agent.s,
                                    out.speed * kSimDt + 2.0);
    }
    next.agents.push_back(out);
  }
  return next;
}

std::optional<CollisionRecord> detect_collision(const Frame& frame) {
  // Scan in ascending id order so the reported pair is the lowest-sorted one.
  std::vector<size_t> order(frame.agents.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return frame.agents[x].id < frame.agents[y].id;
  });
  for (size_t i = 0; i < order.size(); ++i) {
    for (size_t j = i + 1; j < order.size(); ++j) {
      const AgentState& a = frame.agents[order[i]];
      const AgentState& b = frame.agents[order[j]];
      if (!is_vehicle(a) && !is_vehicle(b)) continue;
      if (obb_overlap(a.box(), b.box())) {
        CollisionRecord rec;
        rec.id_a = std::min(a.id, b.id);
        rec.id_b = std::max(a.id, b.id);
        rec.contact = (a.pose.position() + b.pose.position()) * 0.5;
        rec.t = frame.t;
        return rec;
      }
    }
  }
  return std::nullopt;
}

ScenarioLog run_scenario(const SpawnPlan& plan, const ScenarioConfig& config,
                         const IntersectionMap& map) {
  ScenarioLog log;
  log.config = config;
  log.agent_info = plan.agents;
  log.infrastructure = plan.infrastructure;
  log.ego_id = plan.ego_id;

  Frame frame;
  frame.t = 0.0;
  for (const auto& a : plan.agents) {
    AgentState st;
    st.id = a.id;
    st.cls = a.cls;
    st.role = a.role;
    st.pose = a.initial_pose;
    st.speed = a.target_speed;
    st.length = a.length;
    st.width = a.width;
    st.s = a.initial_s;
    frame.agents.push_back(st);
  }
  std::sort(frame.agents.begin(), frame.agents.end(),
            [](const AgentState& x, const AgentState& y) { return x.id < y.id; });

  const int max_frames = static_cast<int>(std::lround(config.duration_cap / kSimDt));
  for (int k = 0;; ++k) {
    frame.t = k * kSimDt;  // keep times exact multiples of 0.1
    log.frames.push_back(frame);
    if (auto rec = detect_collision(frame)) {
      rec->t = frame.t;
      log.collision = rec;
      log.termination = TerminationReason::kCollision;
      break;
    }
    bool ego_done = false;
    for (const auto& a : frame.agents) {
      if (a.id != plan.ego_id) continue;
      for (const auto& info : plan.agents) {
        if (info.id == a.id && a.s >= info.trajectory.length() - 0.5) ego_done = true;
      }
    }
    if (ego_done) {
      log.termination = TerminationReason::kTrajectoryComplete;
      break;
    }
    if (k >= max_frames) {
      log.termination = TerminationReason::kTimeout;
      break;
    }
    frame = step(frame, plan.agents, map);
  }
  return log;
}

}  // namespace crashsim
