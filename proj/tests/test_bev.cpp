#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "crashsim/bev.hpp"
#include "crashsim/pipeline.hpp"
#include "crashsim/scenario.hpp"
#include "crashsim/sim.hpp"

using namespace crashsim;

namespace {

struct MovingAgent {
  int id;
  double x0, y0, yaw;
  double vx, vy;
  double length = 4.0, width = 2.0;
};

// Constant-velocity synthetic log at 10 Hz.
ScenarioLog constant_log(const std::vector<MovingAgent>& specs, int n_frames) {
  ScenarioLog log;
  for (const auto& m : specs) {
    SpawnAgent a;
    a.id = m.id;
    a.cls = AgentClass::kCar;
    a.length = m.length;
    a.width = m.width;
    log.agent_info.push_back(a);
  }
  log.ego_id = specs.front().id;
  for (int k = 0; k < n_frames; ++k) {
    Frame f;
    f.t = k * kSimDt;
    for (const auto& m : specs) {
      AgentState st;
      st.id = m.id;
      st.length = m.length;
      st.width = m.width;
      st.pose = Pose2(m.x0 + m.vx * f.t, m.y0 + m.vy * f.t, m.yaw);
      st.speed = std::hypot(m.vx, m.vy);
      f.agents.push_back(st);
    }
    log.frames.push_back(std::move(f));
  }
  return log;
}

// Max-overlap decoded id for a gt agent's cells at one timestep.
int dominant_decoded_id(const InstanceMap& decoded, const InstanceMap& gt, int agent_id, int tau) {
  std::map<int, int> votes;
  for (int idx = 0; idx < gt.grid.size(); ++idx) {
    if (gt.ids[tau][idx] != agent_id) continue;
    const int did = decoded.ids[tau][idx];
    if (did != 0) ++votes[did];
  }
  int best = 0, best_n = 0;
  for (const auto& [id, n] : votes) {
    if (n > best_n) {
      best = id;
      best_n = n;
    }
  }
  return best;
}

double instance_iou(const InstanceMap& decoded, int did, const InstanceMap& gt, int agent_id,
                    int tau) {
  long inter = 0, uni = 0;
  for (int idx = 0; idx < gt.grid.size(); ++idx) {
    const bool p = decoded.ids[tau][idx] == did;
    const bool g = gt.ids[tau][idx] == agent_id;
    inter += (p && g) ? 1 : 0;
    uni += (p || g) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

}  // namespace

TEST_CASE("encode_motion static and moving examples") {
  const GridSpec grid = GridSpec::motion_grid();

  // static vehicle at the ego origin: flow identically zero on its cells
  const ScenarioLog still = constant_log({{1, 0, 0, 0, 0, 0}}, 30);
  const EncodeResult enc = encode_motion(still, 0, Pose2(0, 0, 0), grid, 4, nullptr);
  REQUIRE(enc.field.steps() == 5);
  int seg_cells = 0;
  for (int tau = 0; tau < 5; ++tau) {
    for (int idx = 0; idx < grid.size(); ++idx) {
      if (enc.field.seg[tau][idx] > 0.5f) {
        if (tau == 0) ++seg_cells;
        CHECK(enc.field.flow_x[tau][idx] == 0.0f);
        CHECK(enc.field.flow_y[tau][idx] == 0.0f);
        CHECK(enc.instances.ids[tau][idx] == 1);
      }
    }
  }
  // 4 m x 2 m axis-aligned box rasterizes to 32 cells at 0.5 m
  CHECK(seg_cells == 32);

  // vehicle moving +x at 5 m/s: flow = (2.5, 0) between the 2 Hz steps
  const ScenarioLog moving = constant_log({{1, 0, 0, 0, 5.0, 0}}, 40);
  const EncodeResult enc2 = encode_motion(moving, 0, Pose2(0, 0, 0), grid, 4, nullptr);
  bool checked = false;
  for (int tau = 0; tau < 4; ++tau) {  // last step has no successor: flow 0
    for (int idx = 0; idx < grid.size(); ++idx) {
      if (enc2.field.seg[tau][idx] > 0.5f) {
        CHECK(enc2.field.flow_x[tau][idx] == doctest::Approx(2.5).epsilon(1e-6));
        CHECK(enc2.field.flow_y[tau][idx] == doctest::Approx(0.0).epsilon(1e-6));
        checked = true;
      }
    }
  }
  CHECK(checked);
  for (int idx = 0; idx < grid.size(); ++idx) {
    if (enc2.field.seg[4][idx] > 0.5f) CHECK(enc2.field.flow_x[4][idx] == 0.0f);
  }
}

TEST_CASE("encode_motion offset consistency within 1e-6") {
  const GridSpec grid = GridSpec::motion_grid();
  const ScenarioLog log =
      constant_log({{1, 3.3, -7.1, 0.4, 4.0, 1.0}, {2, -12.0, 8.0, -1.1, -3.0, 2.0}}, 40);
  const EncodeResult enc = encode_motion(log, 5, Pose2(1.0, 2.0, 0.3), grid, 4, nullptr);
  for (int tau = 0; tau < enc.field.steps(); ++tau) {
    const Frame& frame = log.frames[5 + 5 * static_cast<size_t>(tau)];
    for (int ix = 0; ix < grid.nx(); ++ix) {
      for (int iy = 0; iy < grid.ny(); ++iy) {
        const int idx = grid.index(ix, iy);
        if (enc.field.seg[tau][idx] <= 0.5f) continue;
        const int id = enc.instances.ids[tau][idx];
        Vec2 center;
        for (const auto& a : frame.agents) {
          if (a.id == id) center = se2_apply_inverse(Pose2(1.0, 2.0, 0.3), a.pose.position());
        }
        const Vec2 voted = grid.cell_center(ix, iy) +
                           Vec2(enc.field.offset_x[tau][idx], enc.field.offset_y[tau][idx]);
        CHECK((voted - center).norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("encode_motion throws when the window leaves the log") {
  const ScenarioLog log = constant_log({{1, 0, 0, 0, 0, 0}}, 15);
  CHECK_THROWS_AS(encode_motion(log, 0, Pose2(0, 0, 0), GridSpec::motion_grid(), 4, nullptr),
                  std::out_of_range);
}

TEST_CASE("decode_instances basics") {
  const GridSpec grid = GridSpec::motion_grid();
  // all-zero field decodes to all background
  const MotionField zero = MotionField::zeros(grid, 3);
  const InstanceMap empty = decode_instances(zero, grid);
  for (int tau = 0; tau < 3; ++tau) {
    for (int idx = 0; idx < grid.size(); ++idx) CHECK(empty.ids[tau][idx] == 0);
  }
  CHECK(instances_to_polygons(empty, 0).empty());

  // two-vehicle roundtrip: decoded ids bijective to the agents
  const ScenarioLog log = constant_log({{1, 5, 0, 0, 3, 0}, {2, -8, 6, 1.2, 0, -2}}, 40);
  const EncodeResult enc = encode_motion(log, 0, Pose2(0, 0, 0), grid, 4, nullptr);
  const InstanceMap dec = decode_instances(enc.field, grid);
  for (int tau = 0; tau < 5; ++tau) {
    std::map<int, int> gt_to_dec;
    std::set<int> dec_ids;
    for (int idx = 0; idx < grid.size(); ++idx) {
      if (dec.ids[tau][idx] != 0) dec_ids.insert(dec.ids[tau][idx]);
    }
    for (const int agent : {1, 2}) {
      const int did = dominant_decoded_id(dec, enc.instances, agent, tau);
      CHECK(did != 0);
      gt_to_dec[agent] = did;
    }
    CHECK(gt_to_dec[1] != gt_to_dec[2]);
    CHECK(dec_ids.size() == 2);
  }

  // two vehicles with a 1 m gap stay separate instances (NMS radius 1.5 m,
  // center separation 3 m)
  const ScenarioLog close_log = constant_log({{3, 0, 1.5, 0, 0, 0}, {4, 0, -1.5, 0, 0, 0}}, 10);
  const EncodeResult enc2 = encode_motion(close_log, 0, Pose2(0, 0, 0), grid, 1, nullptr);
  const InstanceMap dec2 = decode_instances(enc2.field, grid);
  std::set<int> ids0;
  for (int idx = 0; idx < grid.size(); ++idx) {
    if (dec2.ids[0][idx] != 0) ids0.insert(dec2.ids[0][idx]);
  }
  CHECK(ids0.size() == 2);
}

TEST_CASE("instances_to_polygons shapes") {
  const GridSpec grid = GridSpec::motion_grid();
  InstanceMap imap = InstanceMap::zeros(grid, 1);
  // a 8x4-cell rectangle (4 m x 2 m footprint)
  for (int ix = 100; ix < 108; ++ix) {
    for (int iy = 100; iy < 104; ++iy) imap.ids[0][grid.index(ix, iy)] = 7;
  }
  // a single pedestrian cell
  imap.ids[0][grid.index(20, 20)] = 9;
  const auto polys = instances_to_polygons(imap, 0);
  REQUIRE(polys.size() == 2);
  for (const auto& [id, poly] : polys) {
    if (id == 7) {
      CHECK(poly.area() == doctest::Approx(8.0).epsilon(0.15));  // within 15 percent
    } else {
      CHECK(id == 9);
      CHECK(poly.area() == doctest::Approx(0.25).epsilon(1e-9));  // 0.5 m square
      const Vec2 cc = grid.cell_center(20, 20);
      CHECK((poly.centroid() - cc).norm() < 1e-9);
    }
  }
}

TEST_CASE("sample_field_variants protocol") {
  const GridSpec grid = GridSpec::motion_grid();
  const ScenarioLog log = constant_log({{1, 2, 3, 0.5, 4, 0}}, 40);
  const MotionField field = encode_motion(log, 0, Pose2(0, 0, 0), grid, 4, nullptr).field;

  // n = 0: only the original
  CHECK(sample_field_variants(field, 0, 1).size() == 1);

  // n = 5: six fields, the first identical to the input
  const auto six = sample_field_variants(field, 5, 1);
  REQUIRE(six.size() == 6);
  bool any_diff = false;
  for (int tau = 0; tau < field.steps(); ++tau) {
    for (int idx = 0; idx < grid.size(); ++idx) {
      CHECK(six[0].flow_x[tau][idx] == field.flow_x[tau][idx]);
      CHECK(six[0].seg[tau][idx] == field.seg[tau][idx]);
      if (six[1].flow_x[tau][idx] != field.flow_x[tau][idx]) any_diff = true;
      // segmentation is never perturbed
      CHECK(six[1].seg[tau][idx] == field.seg[tau][idx]);
    }
  }
  CHECK(any_diff);

  // sigma = 0: all copies identical
  const auto flat = sample_field_variants(field, 3, 1, 0.0);
  for (const auto& v : flat) {
    for (int tau = 0; tau < field.steps(); ++tau) {
      for (int idx = 0; idx < grid.size(); ++idx) {
        CHECK(v.flow_x[tau][idx] == field.flow_x[tau][idx]);
        CHECK(v.flow_y[tau][idx] == field.flow_y[tau][idx]);
      }
    }
  }

  // determinism: same seed, same variants
  const auto again = sample_field_variants(field, 2, 99);
  const auto again2 = sample_field_variants(field, 2, 99);
  for (size_t v = 0; v < again.size(); ++v) {
    for (int tau = 0; tau < field.steps(); ++tau) {
      CHECK(again[v].flow_x[tau] == again2[v].flow_x[tau]);
    }
  }
}

TEST_CASE("roundtrip IoU and id persistence on simulated scenes") {
  const GridSpec grid = GridSpec::motion_grid();
  // an instance is decodable when, at every timestep, its center sits inside
  // the grid and no other center is within the NMS radius plus a margin
  const double kSeparation = 2.0;
  int agents_total = 0, agents_persistent = 0;
  for (const uint64_t seed : {11u, 12u, 13u, 14u, 15u, 16u}) {
    ScenarioConfig config;
    config.type = ScenarioType::kSigRedLightStraight;
    config.seed = seed;
    const IntersectionMap map = map_for_config(config);
    const ScenarioLog log = run_scenario(spawn_scenario(config, map), config, map);
    if (log.frames.size() < 31) continue;
    const size_t k0 = 10;
    const auto ego = log.agent_in_frame(k0, log.ego_id);
    REQUIRE(ego.has_value());
    const EncodeResult enc = encode_motion(log, k0, ego->pose, grid, 4, nullptr);
    const InstanceMap dec = decode_instances(enc.field, grid);

    for (const auto& info : log.agent_info) {
      bool decodable = true;
      for (int tau = 0; tau < 5 && decodable; ++tau) {
        const Frame& frame = log.frames[k0 + 5 * static_cast<size_t>(tau)];
        std::optional<Vec2> center;
        for (const auto& a : frame.agents) {
          if (a.id == info.id) center = se2_apply_inverse(ego->pose, a.pose.position());
        }
        if (!center || !grid.cell_of(*center)) {
          decodable = false;
          break;
        }
        for (const auto& a : frame.agents) {
          if (a.id == info.id) continue;
          const Vec2 other = se2_apply_inverse(ego->pose, a.pose.position());
          if ((other - *center).norm() < kSeparation) decodable = false;
        }
      }
      if (!decodable) continue;
      // skip sub-2-cell footprints (border clipping)
      int cells = 0;
      for (int idx = 0; idx < grid.size(); ++idx) {
        if (enc.instances.ids[0][idx] == info.id) ++cells;
      }
      if (cells < 2) continue;
      const int did = dominant_decoded_id(dec, enc.instances, info.id, 0);
      REQUIRE(did != 0);
      CHECK(instance_iou(dec, did, enc.instances, info.id, 0) >= 0.7);

      ++agents_total;
      bool persistent = true;
      for (int tau = 1; tau < 5; ++tau) {
        int gt_cells = 0;
        for (int idx = 0; idx < grid.size(); ++idx) {
          if (enc.instances.ids[tau][idx] == info.id) ++gt_cells;
        }
        if (gt_cells < 2) continue;
        if (dominant_decoded_id(dec, enc.instances, info.id, tau) != did) persistent = false;
      }
      if (persistent) ++agents_persistent;
    }
  }
  REQUIRE(agents_total > 5);
  CHECK(static_cast<double>(agents_persistent) / agents_total >= 0.9);
}
