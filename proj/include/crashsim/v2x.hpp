#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "crashsim/bev.hpp"
#include "crashsim/scenario.hpp"
#include "crashsim/sim.hpp"

namespace crashsim {

constexpr double kViewRange = 70.0;  // meters, omnidirectional
constexpr int kObservationFrames = 3;

enum class RigRole { kEgo, kBehind, kOtherVehicle, kOtherFollower, kInfrastructure };

struct AgentRig {
  RigRole role = RigRole::kEgo;
  int agent_id = -1;  // -1 for the infrastructure rig
  double view_range = kViewRange;
  double noise_mu = 0.0;     // pose-noise displacement mean, meters
  double noise_sigma = 0.0;  // pose-noise displacement stddev, meters
  double latency = 0.0;      // seconds
};

// Table-style configuration names: single, ego+behind, ego+other, ego+infra,
// ego+behind+other, 4vehicles, 4vehicles+infra.
std::vector<std::string> all_config_names();
std::vector<AgentRig> make_rigs(const std::string& config_name, const ScenarioLog& log);

// Ids visible from the rig, per frame index.
struct VisibilityMask {
  std::vector<std::unordered_set<int>> visible;  // indexed by frame
};

VisibilityMask compute_visibility(const ScenarioLog& log, const AgentRig& rig,
                                  const std::vector<Polygon>& buildings);

// Occlusion classification over the observation frames ("invisible" when
// more than half of them hide at least one accident agent from the rig).
enum class SampleVisibility { kVisible, kInvisible };
SampleVisibility classify_sample_visibility(const std::vector<bool>& frame_has_invisible_accident);

Pose2 degrade_pose(const Pose2& pose, double mu, double sigma, Rng& rng);

// Stale-frame index for a contributing rig (ego is never delayed).
size_t apply_latency(size_t frame_index, double latency);

struct WarpedField {
  MotionField field;
  // Per-timestep support masks, used as fusion validity.
  std::vector<std::vector<uint8_t>> valid;
};

// Resample the source field into the ego grid. Segmentation uses
// nearest-neighbor sampling, the continuous channels bilinear; offset/flow
// vectors are rotated by the relative yaw.
WarpedField warp_to_ego(const MotionField& field, const Pose2& src_pose, const Pose2& ego_pose);

MotionField fuse_average(const std::vector<WarpedField>& fields);

struct OraclePrediction {
  MotionField field;
  // Agents contributed by at least one rig.
  std::unordered_set<int> perceived_agents;
  // Per observation frame: does the ego rig miss an accident agent?
  std::vector<bool> ego_accident_occluded;
};

// The stand-in predictor: per rig, encode ground truth restricted to the
// rig's visibility at latency-shifted frames, warp into the ego frame with
// degraded poses, and average-fuse. Agents unseen by every rig are absent.
// visibility must be aligned with rigs (one precomputed mask per rig).
OraclePrediction fused_oracle_predict(const ScenarioLog& log,
                                      const std::vector<AgentRig>& rigs,
                                      const std::vector<VisibilityMask>& visibility, size_t k0,
                                      const GridSpec& grid, int future_steps, uint64_t noise_seed);

}  // namespace crashsim
