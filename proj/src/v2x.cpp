#include "crashsim/v2x.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crashsim {

namespace {

std::optional<int> find_agent_by_role(const ScenarioLog& log, AgentRole role) {
  for (const auto& a : log.agent_info) {
    if (a.role == role) return a.id;
  }
  return std::nullopt;
}

// Rig-to-agent mapping. Accident scenarios bind the rigs to the designed
// four-vehicle setup; normal scenarios fall back to vehicles in id order.
std::optional<int> rig_agent(RigRole role, const ScenarioLog& log) {
  static const std::pair<RigRole, AgentRole> kMap[] = {
      {RigRole::kEgo, AgentRole::kAccident1},
      {RigRole::kBehind, AgentRole::kFollower1},
      {RigRole::kOtherVehicle, AgentRole::kAccident2},
      {RigRole::kOtherFollower, AgentRole::kFollower2},
  };
  for (const auto& [rr, ar] : kMap) {
    if (rr == role) {
      if (auto id = find_agent_by_role(log, ar)) return id;
    }
  }
  // Fallback: ego first, then remaining vehicles in id order.
  std::vector<int> vehicles;
  for (const auto& a : log.agent_info) {
    if (a.cls != AgentClass::kPedestrian) vehicles.push_back(a.id);
  }
  std::sort(vehicles.begin(), vehicles.end());
  const auto ego_it = std::find(vehicles.begin(), vehicles.end(), log.ego_id);
  if (ego_it != vehicles.end()) {
    std::swap(*vehicles.begin(), *ego_it);
  }
  size_t index = 0;
  switch (role) {
    case RigRole::kEgo: index = 0; break;
    case RigRole::kBehind: index = 1; break;
    case RigRole::kOtherVehicle: index = 2; break;
    case RigRole::kOtherFollower: index = 3; break;
    case RigRole::kInfrastructure: return std::nullopt;
  }
  if (index < vehicles.size()) return vehicles[index];
  return std::nullopt;
}

Pose2 rig_pose(const ScenarioLog& log, const AgentRig& rig, size_t frame) {
  if (rig.role == RigRole::kInfrastructure) return log.infrastructure.pose;
  const auto agent = log.agent_in_frame(frame, rig.agent_id);
  if (!agent) throw std::runtime_error("rig agent missing from frame");
  return agent->pose;
}

}  // namespace

std::vector<std::string> all_config_names() {
  return {"single",          "ego+behind", "ego+other", "ego+infra",
          "ego+behind+other", "4vehicles",  "4vehicles+infra"};
}

std::vector<AgentRig> make_rigs(const std::string& config_name, const ScenarioLog& log) {
  std::vector<RigRole> roles;
  if (config_name == "single") {
    roles = {RigRole::kEgo};
  } else if (config_name == "ego+behind") {
    roles = {RigRole::kEgo, RigRole::kBehind};
  } else if (config_name == "ego+other") {
    roles = {RigRole::kEgo, RigRole::kOtherVehicle};
  } else if (config_name == "ego+infra") {
    roles = {RigRole::kEgo, RigRole::kInfrastructure};
  } else if (config_name == "ego+behind+other") {
    roles = {RigRole::kEgo, RigRole::kBehind, RigRole::kOtherVehicle};
  } else if (config_name == "4vehicles") {
    roles = {RigRole::kEgo, RigRole::kBehind, RigRole::kOtherVehicle, RigRole::kOtherFollower};
  } else if (config_name == "4vehicles+infra") {
    roles = {RigRole::kEgo, RigRole::kBehind, RigRole::kOtherVehicle, RigRole::kOtherFollower,
             RigRole::kInfrastructure};
  } else {
    throw std::invalid_argument("unknown V2X configuration: " + config_name);
  }
  std::vector<AgentRig> rigs;
  for (const RigRole role : roles) {
    AgentRig rig;
    rig.role = role;
    if (role == RigRole::kInfrastructure) {
      rig.agent_id = -1;
    } else {
      const auto id = rig_agent(role, log);
      if (!id) continue;  // scenario has fewer vehicles than the config
      rig.agent_id = *id;
    }
    rigs.push_back(rig);
  }
  return rigs;
}

VisibilityMask compute_visibility(const ScenarioLog& log, const AgentRig& rig,
                                  const std::vector<Polygon>& buildings) {
  VisibilityMask mask;
  mask.visible.resize(log.frames.size());
  const bool infra = rig.role == RigRole::kInfrastructure;
  for (size_t k = 0; k < log.frames.size(); ++k) {
    const Frame& frame = log.frames[k];
    const Vec2 origin = rig_pose(log, rig, k).position();
    auto& visible = mask.visible[k];
    for (const auto& target : frame.agents) {
      if (target.id == rig.agent_id) {
        visible.insert(target.id);
        continue;
      }
      const Vec2 tpos = target.pose.position();
      if ((tpos - origin).norm() > rig.view_range) continue;
      bool blocked = false;
      for (const auto& b : buildings) {
        if (segment_intersects_polygon(origin, tpos, b)) {
          blocked = true;
          break;
        }
      }
      // Elevated infrastructure mounts see over vehicles.
      if (!blocked && !infra) {
        for (const auto& occ : frame.agents) {
          if (occ.id == target.id || occ.id == rig.agent_id) continue;
          if (occ.cls == AgentClass::kPedestrian) continue;
          if (segment_intersects_polygon(origin, tpos, box_to_polygon(occ.box()))) {
            blocked = true;
            break;
          }
        }
      }
      if (!blocked) visible.insert(target.id);
    }
  }
  return mask;
}

SampleVisibility classify_sample_visibility(
    const std::vector<bool>& frame_has_invisible_accident) {
  const int n = static_cast<int>(frame_has_invisible_accident.size());
  int invisible_frames = 0;
  for (const bool v : frame_has_invisible_accident) invisible_frames += v ? 1 : 0;
  return 2 * invisible_frames > n ? SampleVisibility::kInvisible : SampleVisibility::kVisible;
}

Pose2 degrade_pose(const Pose2& pose, double mu, double sigma, Rng& rng) {
  const double magnitude = std::max(0.0, rng.normal(mu, sigma));
  const double direction = rng.uniform(0.0, 2.0 * kPi);
  return Pose2(pose.x + magnitude * std::cos(direction), pose.y + magnitude * std::sin(direction),
               pose.yaw);
}

size_t apply_latency(size_t frame_index, double latency) {
  const auto shift = static_cast<size_t>(std::floor(latency / kSimDt + 0.5));
  return frame_index >= shift ? frame_index - shift : 0;
}

WarpedField warp_to_ego(const MotionField& field, const Pose2& src_pose, const Pose2& ego_pose) {
  const GridSpec& grid = field.grid;
  const int steps = field.steps();
  WarpedField out;
  out.valid.assign(steps, std::vector<uint8_t>(static_cast<size_t>(grid.size()), 0));

  const bool identity = std::abs(src_pose.x - ego_pose.x) < 1e-12 &&
                        std::abs(src_pose.y - ego_pose.y) < 1e-12 &&
                        std::abs(normalize_angle(src_pose.yaw - ego_pose.yaw)) < 1e-12;
  if (identity) {
    out.field = field;
    for (int tau = 0; tau < steps; ++tau) {
      for (int idx = 0; idx < grid.size(); ++idx) {
        out.valid[tau][idx] =
            (field.seg[tau][idx] > 0.05f || field.centerness[tau][idx] > 0.02f) ? 1 : 0;
      }
    }
    return out;
  }

  out.field = MotionField::zeros(grid, steps);
  const double rel_yaw = normalize_angle(src_pose.yaw - ego_pose.yaw);
  const int nx = grid.nx(), ny = grid.ny();

  auto bilinear = [&](const std::vector<float>& data, double fx, double fy) -> float {
    const int ix = static_cast<int>(std::floor(fx));
    const int iy = static_cast<int>(std::floor(fy));
    const double ax = fx - ix, ay = fy - iy;
    auto at = [&](int jx, int jy) -> float {
      if (!grid.in_range(jx, jy)) return 0.0f;
      return data[grid.index(jx, jy)];
    };
    return static_cast<float>((1 - ax) * (1 - ay) * at(ix, iy) + ax * (1 - ay) * at(ix + 1, iy) +
                              (1 - ax) * ay * at(ix, iy + 1) + ax * ay * at(ix + 1, iy + 1));
  };

  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const int idx = grid.index(ix, iy);
      const Vec2 p_world = se2_apply(ego_pose, grid.cell_center(ix, iy));
      const Vec2 p_src = se2_apply_inverse(src_pose, p_world);
      const double fx = (p_src.x - grid.x_min) / grid.cell - 0.5;
      const double fy = (p_src.y - grid.y_min) / grid.cell - 0.5;
      const int nnx = static_cast<int>(std::lround(fx));
      const int nny = static_cast<int>(std::lround(fy));
      if (!grid.in_range(nnx, nny)) continue;  // outside source coverage
      const int src_idx = grid.index(nnx, nny);
      for (int tau = 0; tau < steps; ++tau) {
        const float seg = field.seg[tau][src_idx];  // nearest-neighbor
        const float cent = bilinear(field.centerness[tau], fx, fy);
        if (seg <= 0.05f && cent <= 0.02f) continue;
        const Vec2 off = Vec2(bilinear(field.offset_x[tau], fx, fy),
                              bilinear(field.offset_y[tau], fx, fy))
                             .rotated(rel_yaw);
        const Vec2 flow = Vec2(bilinear(field.flow_x[tau], fx, fy),
                               bilinear(field.flow_y[tau], fx, fy))
                              .rotated(rel_yaw);
        out.field.seg[tau][idx] = seg;
        out.field.centerness[tau][idx] = cent;
        out.field.offset_x[tau][idx] = static_cast<float>(off.x);
        out.field.offset_y[tau][idx] = static_cast<float>(off.y);
        out.field.flow_x[tau][idx] = static_cast<float>(flow.x);
        out.field.flow_y[tau][idx] = static_cast<float>(flow.y);
        out.valid[tau][idx] = 1;
      }
    }
  }
  return out;
}

MotionField fuse_average(const std::vector<WarpedField>& fields) {
  if (fields.empty()) throw std::invalid_argument("fuse_average: no fields");
  const GridSpec grid = fields.front().field.grid;
  const int steps = fields.front().field.steps();
  for (const auto& f : fields) {
    if (f.field.grid.nx() != grid.nx() || f.field.grid.ny() != grid.ny() ||
        f.field.steps() != steps) {
      throw std::invalid_argument("fuse_average: grid mismatch");
    }
  }
  MotionField out = MotionField::zeros(grid, steps);
  for (int tau = 0; tau < steps; ++tau) {
    for (int idx = 0; idx < grid.size(); ++idx) {
      int n = 0;
      float seg = 0, cent = 0, ox = 0, oy = 0, fx = 0, fy = 0;
      for (const auto& f : fields) {
        if (!f.valid[tau][idx]) continue;
        ++n;
        seg += f.field.seg[tau][idx];
        cent += f.field.centerness[tau][idx];
        ox += f.field.offset_x[tau][idx];
        oy += f.field.offset_y[tau][idx];
        fx += f.field.flow_x[tau][idx];
        fy += f.field.flow_y[tau][idx];
      }
      if (n == 0) continue;
      out.seg[tau][idx] = seg / n;
      out.centerness[tau][idx] = cent / n;
      out.offset_x[tau][idx] = ox / n;
      out.offset_y[tau][idx] = oy / n;
      out.flow_x[tau][idx] = fx / n;
      out.flow_y[tau][idx] = fy / n;
    }
  }
  return out;
}

OraclePrediction fused_oracle_predict(const ScenarioLog& log,
                                      const std::vector<AgentRig>& rigs,
                                      const std::vector<VisibilityMask>& visibility, size_t k0,
                                      const GridSpec& grid, int future_steps, uint64_t noise_seed) {
  if (rigs.empty() || rigs.size() != visibility.size()) {
    throw std::invalid_argument("fused_oracle_predict: rigs/visibility mismatch");
  }
  OraclePrediction out;
  const Pose2 ego_pose = rig_pose(log, rigs.front(), k0);
  Rng noise_rng(noise_seed ^ 0x763278206e6f69aaULL);

  std::vector<WarpedField> warped;
  for (size_t r = 0; r < rigs.size(); ++r) {
    const AgentRig& rig = rigs[r];
    const bool is_ego = rig.role == RigRole::kEgo;
    Rng rig_rng = noise_rng.fork(r);
    const size_t k_rig = is_ego ? k0 : apply_latency(k0, rig.latency);

    // An agent counts as perceived when visible in a majority of the rig's
    // (latency-shifted) observation frames.
    std::vector<size_t> obs_frames;
    for (int i = kObservationFrames - 1; i >= 0; --i) {
      const size_t back = static_cast<size_t>(i) * kFrameStride;
      obs_frames.push_back(k_rig >= back ? k_rig - back : 0);
    }
    std::unordered_set<int> included;
    for (const auto& agent : log.frames[k_rig].agents) {
      int seen = 0;
      for (const size_t f : obs_frames) {
        if (visibility[r].visible[f].count(agent.id) > 0) ++seen;
      }
      if (2 * seen > kObservationFrames) included.insert(agent.id);
    }
    for (const int id : included) out.perceived_agents.insert(id);

    const Pose2 true_pose = rig_pose(log, rig, k_rig);
    const Pose2 reported_pose =
        is_ego ? true_pose : degrade_pose(true_pose, rig.noise_mu, rig.noise_sigma, rig_rng);
    const EncodeResult enc = encode_motion(log, k_rig, true_pose, grid, future_steps, &included);
    warped.push_back(warp_to_ego(enc.field, reported_pose, ego_pose));
  }
  out.field = fuse_average(warped);

  // Ego-side accident occlusion flags for sample classification.
  std::vector<int> accident_ids;
  for (const auto& a : log.agent_info) {
    if (a.role == AgentRole::kAccident1 || a.role == AgentRole::kAccident2) {
      accident_ids.push_back(a.id);
    }
  }
  for (int i = kObservationFrames - 1; i >= 0; --i) {
    const size_t back = static_cast<size_t>(i) * kFrameStride;
    const size_t f = k0 >= back ? k0 - back : 0;
    bool occluded = false;
    for (const int id : accident_ids) {
      if (visibility[0].visible[f].count(id) == 0) occluded = true;
    }
    out.ego_accident_occluded.push_back(occluded);
  }
  return out;
}

}  // namespace crashsim
