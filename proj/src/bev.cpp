#include "crashsim/bev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "crashsim/rng.hpp"

namespace crashsim {

MotionField MotionField::zeros(const GridSpec& grid, int steps) {
  MotionField f;
  f.grid = grid;
  const size_t n = static_cast<size_t>(grid.size());
  f.seg.assign(steps, std::vector<float>(n, 0.0f));
  f.centerness.assign(steps, std::vector<float>(n, 0.0f));
  f.offset_x.assign(steps, std::vector<float>(n, 0.0f));
  f.offset_y.assign(steps, std::vector<float>(n, 0.0f));
  f.flow_x.assign(steps, std::vector<float>(n, 0.0f));
  f.flow_y.assign(steps, std::vector<float>(n, 0.0f));
  return f;
}

InstanceMap InstanceMap::zeros(const GridSpec& grid, int steps) {
  InstanceMap m;
  m.grid = grid;
  m.ids.assign(steps, std::vector<int>(static_cast<size_t>(grid.size()), 0));
  return m;
}

namespace {

constexpr double kCenternessSigmaCells = 1.5;

void splat_centerness(std::vector<float>& cent, const GridSpec& grid, const Vec2& center) {
  const double sigma = kCenternessSigmaCells * grid.cell;
  const double reach = 4.0 * sigma;
  const int ix0 = std::max(0, static_cast<int>(std::floor((center.x - reach - grid.x_min) / grid.cell)));
  const int ix1 = std::min(grid.nx() - 1,
                           static_cast<int>(std::floor((center.x + reach - grid.x_min) / grid.cell)));
  const int iy0 = std::max(0, static_cast<int>(std::floor((center.y - reach - grid.y_min) / grid.cell)));
  const int iy1 = std::min(grid.ny() - 1,
                           static_cast<int>(std::floor((center.y + reach - grid.y_min) / grid.cell)));
  for (int ix = ix0; ix <= ix1; ++ix) {
    for (int iy = iy0; iy <= iy1; ++iy) {
      const double d2 = (grid.cell_center(ix, iy) - center).squared_norm();
      const float v = static_cast<float>(std::exp(-d2 / (2.0 * sigma * sigma)));
      float& cell = cent[grid.index(ix, iy)];
      cell = std::max(cell, v);
    }
  }
}

}  // namespace

EncodeResult encode_motion(const ScenarioLog& log, size_t k0, const Pose2& ego_pose,
                           const GridSpec& grid, int future_steps,
                           const std::unordered_set<int>* include_agents) {
  const size_t last = k0 + static_cast<size_t>(kFrameStride) * future_steps;
  if (last >= log.frames.size()) {
    throw std::out_of_range("encode_motion: window extends past the log end");
  }
  const int steps = future_steps + 1;
  EncodeResult out{MotionField::zeros(grid, steps), InstanceMap::zeros(grid, steps)};
  // Distance to the owning instance center, for contested cells.
  std::vector<double> owner_d2(static_cast<size_t>(grid.size()));

  for (int tau = 0; tau < steps; ++tau) {
    std::fill(owner_d2.begin(), owner_d2.end(), std::numeric_limits<double>::infinity());
    const Frame& frame = log.frames[k0 + static_cast<size_t>(kFrameStride) * tau];
    const Frame* next_frame =
        tau + 1 < steps ? &log.frames[k0 + static_cast<size_t>(kFrameStride) * (tau + 1)] : nullptr;
    for (const auto& agent : frame.agents) {
      if (include_agents != nullptr && include_agents->count(agent.id) == 0) continue;
      const Vec2 center = se2_apply_inverse(ego_pose, agent.pose.position());
      const Pose2 local_pose(center.x, center.y, agent.pose.yaw - ego_pose.yaw);
      const OrientedBox box(local_pose, agent.length, agent.width);

      Vec2 flow(0.0, 0.0);
      if (next_frame != nullptr) {
        for (const auto& na : next_frame->agents) {
          if (na.id == agent.id) {
            flow = se2_apply_inverse(ego_pose, na.pose.position()) - center;
            break;
          }
        }
      }
      for (const auto& [ix, iy] : rasterize_box(box, grid)) {
        const int idx = grid.index(ix, iy);
        const double d2 = (grid.cell_center(ix, iy) - center).squared_norm();
        if (d2 >= owner_d2[idx]) continue;
        owner_d2[idx] = d2;
        out.field.seg[tau][idx] = 1.0f;
        const Vec2 off = center - grid.cell_center(ix, iy);
        out.field.offset_x[tau][idx] = static_cast<float>(off.x);
        out.field.offset_y[tau][idx] = static_cast<float>(off.y);
        out.field.flow_x[tau][idx] = static_cast<float>(flow.x);
        out.field.flow_y[tau][idx] = static_cast<float>(flow.y);
        out.instances.ids[tau][idx] = agent.id;
      }
      if (grid.cell_of(center)) {
        splat_centerness(out.field.centerness[tau], grid, center);
      }
    }
  }
  return out;
}

EncodeResult encode_motion(const ScenarioLog& log, size_t k0, int ego_id, const GridSpec& grid,
                           int future_steps) {
  const auto ego = log.agent_in_frame(k0, ego_id);
  if (!ego) throw std::out_of_range("encode_motion: ego agent missing from frame");
  return encode_motion(log, k0, ego->pose, grid, future_steps, nullptr);
}

namespace {

struct Center {
  Vec2 pos;
  float value;
  int id = 0;
};

std::vector<Center> find_centers(const std::vector<float>& cent, const GridSpec& grid,
                                 const DecodeParams& params) {
  std::vector<Center> peaks;
  const int nx = grid.nx(), ny = grid.ny();
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const float v = cent[grid.index(ix, iy)];
      if (v <= params.centerness_threshold) continue;
      bool is_max = true;
      for (int dx = -1; dx <= 1 && is_max; ++dx) {
        for (int dy = -1; dy <= 1 && is_max; ++dy) {
          if (dx == 0 && dy == 0) continue;
          const int jx = ix + dx, jy = iy + dy;
          if (!grid.in_range(jx, jy)) continue;
          const float nv = cent[grid.index(jx, jy)];
          if (nv > v || (nv == v && (dx < 0 || (dx == 0 && dy < 0)))) is_max = false;
        }
      }
      if (is_max) peaks.push_back({grid.cell_center(ix, iy), v});
    }
  }
  // Non-max suppression within the radius; stronger peaks win, ties resolved
  // by scan order for determinism.
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Center& a, const Center& b) { return a.value > b.value; });
  std::vector<Center> kept;
  const double radius = params.nms_radius_cells * grid.cell;
  for (const auto& p : peaks) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if ((p.pos - k.pos).norm() <= radius) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(p);
  }
  return kept;
}

}  // namespace

InstanceMap decode_instances(const MotionField& field, const GridSpec& grid,
                             const DecodeParams& params) {
  const int steps = field.steps();
  InstanceMap imap = InstanceMap::zeros(grid, steps);
  std::vector<Center> prev_centers;
  int next_id = 1;

  for (int tau = 0; tau < steps; ++tau) {
    std::vector<Center> centers = find_centers(field.centerness[tau], grid, params);
    // Deterministic ordering before id assignment.
    std::stable_sort(centers.begin(), centers.end(), [](const Center& a, const Center& b) {
      return a.pos.x < b.pos.x || (a.pos.x == b.pos.x && a.pos.y < b.pos.y);
    });

    if (tau == 0) {
      for (auto& c : centers) c.id = next_id++;
    } else {
      // Propagate ids by warping the previous centers with their instances'
      // mean flow and greedily re-associating within the gate.
      struct Pred {
        Vec2 pos;
        int id;
      };
      std::vector<Pred> preds;
      for (const auto& pc : prev_centers) {
        Vec2 mean_flow(0.0, 0.0);
        int count = 0;
        const auto& prev_ids = imap.ids[tau - 1];
        for (int idx = 0; idx < grid.size(); ++idx) {
          if (prev_ids[idx] != pc.id) continue;
          mean_flow = mean_flow + Vec2(field.flow_x[tau - 1][idx], field.flow_y[tau - 1][idx]);
          ++count;
        }
        if (count > 0) mean_flow = mean_flow / count;
        preds.push_back({pc.pos + mean_flow, pc.id});
      }
      struct Cand {
        double d;
        size_t pred;
        size_t center;
      };
      std::vector<Cand> cands;
      for (size_t p = 0; p < preds.size(); ++p) {
        for (size_t c = 0; c < centers.size(); ++c) {
          const double d = (preds[p].pos - centers[c].pos).norm();
          if (d <= params.association_gate) cands.push_back({d, p, c});
        }
      }
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Cand& a, const Cand& b) { return a.d < b.d; });
      std::vector<bool> pred_used(preds.size(), false), center_used(centers.size(), false);
      for (const auto& cand : cands) {
        if (pred_used[cand.pred] || center_used[cand.center]) continue;
        pred_used[cand.pred] = true;
        center_used[cand.center] = true;
        centers[cand.center].id = preds[cand.pred].id;
      }
      for (auto& c : centers) {
        if (c.id == 0) c.id = next_id++;
      }
    }

    if (!centers.empty()) {
      auto& ids = imap.ids[tau];
      for (int ix = 0; ix < grid.nx(); ++ix) {
        for (int iy = 0; iy < grid.ny(); ++iy) {
          const int idx = grid.index(ix, iy);
          if (field.seg[tau][idx] <= params.segmentation_threshold) continue;
          const Vec2 voted = grid.cell_center(ix, iy) +
                             Vec2(field.offset_x[tau][idx], field.offset_y[tau][idx]);
          double best_d = std::numeric_limits<double>::infinity();
          int best_id = 0;
          for (const auto& c : centers) {
            const double d = (voted - c.pos).squared_norm();
            if (d < best_d) {
              best_d = d;
              best_id = c.id;
            }
          }
          ids[idx] = best_id;
        }
      }
    }
    prev_centers = std::move(centers);
  }
  return imap;
}

std::vector<std::pair<int, Polygon>> instances_to_polygons(const InstanceMap& imap, int step) {
  const GridSpec& grid = imap.grid;
  std::map<int, std::vector<std::pair<int, int>>> cells_by_id;
  for (int ix = 0; ix < grid.nx(); ++ix) {
    for (int iy = 0; iy < grid.ny(); ++iy) {
      const int id = imap.ids.at(step)[grid.index(ix, iy)];
      if (id != 0) cells_by_id[id].emplace_back(ix, iy);
    }
  }
  std::vector<std::pair<int, Polygon>> out;
  const double h = 0.5 * grid.cell;
  for (const auto& [id, cells] : cells_by_id) {
    if (cells.size() < 3) {
      Vec2 centroid(0.0, 0.0);
      for (const auto& [ix, iy] : cells) centroid = centroid + grid.cell_center(ix, iy);
      centroid = centroid / static_cast<double>(cells.size());
      out.emplace_back(id, Polygon({{centroid.x - 0.25, centroid.y - 0.25},
                                    {centroid.x + 0.25, centroid.y - 0.25},
                                    {centroid.x + 0.25, centroid.y + 0.25},
                                    {centroid.x - 0.25, centroid.y + 0.25}}));
      continue;
    }
    // Hull over the cell corners so the outline covers the full cell extent.
    std::vector<Vec2> pts;
    pts.reserve(cells.size() * 4);
    for (const auto& [ix, iy] : cells) {
      const Vec2 c = grid.cell_center(ix, iy);
      pts.push_back({c.x - h, c.y - h});
      pts.push_back({c.x + h, c.y - h});
      pts.push_back({c.x + h, c.y + h});
      pts.push_back({c.x - h, c.y + h});
    }
    out.emplace_back(id, Polygon(convex_hull(std::move(pts))));
  }
  return out;
}

std::vector<MotionField> sample_field_variants(const MotionField& field, int n, uint64_t seed,
                                               double sigma) {
  std::vector<MotionField> out;
  out.reserve(static_cast<size_t>(n) + 1);
  out.push_back(field);
  Rng rng(seed ^ 0x76617269616e74aaULL);
  for (int i = 0; i < n; ++i) {
    MotionField v = field;
    for (int tau = 0; tau < v.steps(); ++tau) {
      for (size_t idx = 0; idx < v.seg[tau].size(); ++idx) {
        if (v.seg[tau][idx] <= 0.05f) continue;
        v.flow_x[tau][idx] += static_cast<float>(rng.normal(0.0, sigma));
        v.flow_y[tau][idx] += static_cast<float>(rng.normal(0.0, sigma));
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace crashsim
