#pragma once

#include <optional>
#include <unordered_set>
#include <vector>

#include "crashsim/geometry.hpp"
#include "crashsim/sim.hpp"

namespace crashsim {

// Log frames per BEV timestep: 10 Hz log sampled at 2 Hz.
constexpr int kFrameStride = 5;
constexpr double kBevDt = 0.5;
constexpr int kDefaultFutureSteps = 4;  // 2 s horizon

// Per-timestep BEV channels. Timestep 0 is the current frame; steps() =
// future_steps + 1. Grids are row-major with x-major rows (ix * ny + iy).
struct MotionField {
  GridSpec grid;
  std::vector<std::vector<float>> seg;
  std::vector<std::vector<float>> centerness;
  std::vector<std::vector<float>> offset_x, offset_y;
  std::vector<std::vector<float>> flow_x, flow_y;

  int steps() const { return static_cast<int>(seg.size()); }
  static MotionField zeros(const GridSpec& grid, int steps);
};

// Per-cell instance ids, 0 = background. Ids are stable across timesteps.
struct InstanceMap {
  GridSpec grid;
  std::vector<std::vector<int>> ids;

  int steps() const { return static_cast<int>(ids.size()); }
  static InstanceMap zeros(const GridSpec& grid, int steps);
};

struct EncodeResult {
  MotionField field;
  InstanceMap instances;
};

// Ground-truth encoding of the window starting at frame k0 in the frame of
// ego_pose. Throws std::out_of_range when future frames are missing. The
// optional filter restricts the encoded agents (used by the V2X rigs).
EncodeResult encode_motion(const ScenarioLog& log, size_t k0, const Pose2& ego_pose,
                           const GridSpec& grid, int future_steps,
                           const std::unordered_set<int>* include_agents = nullptr);

// Convenience overload: ego frame taken from the agent's pose at k0.
EncodeResult encode_motion(const ScenarioLog& log, size_t k0, int ego_id, const GridSpec& grid,
                           int future_steps);

struct DecodeParams {
  double centerness_threshold = 0.3;
  double segmentation_threshold = 0.5;
  double nms_radius_cells = 3.0;
  double association_gate = 3.0;  // meters
};

InstanceMap decode_instances(const MotionField& field, const GridSpec& grid,
                             const DecodeParams& params = {});

// Convex outline of each instance at the timestep, in metric ego-frame
// coordinates. Instances of fewer than 3 cells degrade to a 0.5 m square.
std::vector<std::pair<int, Polygon>> instances_to_polygons(const InstanceMap& imap, int step);

// The distributional-sampling stand-in: the unperturbed field first, then n
// copies with Gaussian flow jitter. Segmentation is untouched.
std::vector<MotionField> sample_field_variants(const MotionField& field, int n, uint64_t seed,
                                               double sigma = 0.5);

}  // namespace crashsim
