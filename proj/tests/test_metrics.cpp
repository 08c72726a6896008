#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "crashsim/metrics.hpp"
#include "crashsim/rng.hpp"

using namespace crashsim;

namespace {

// Fine 0.1 m grid so block gaps can hit exact sub-meter values.
GridSpec fine_grid() { return GridSpec{0.0, 40.0, 0.0, 40.0, 0.1}; }

// Paint an axis-aligned cell rectangle [ix0, ix1) x [iy0, iy1) with an id.
void paint(InstanceMap& imap, int tau, int id, int ix0, int ix1, int iy0, int iy1) {
  for (int ix = ix0; ix < ix1; ++ix) {
    for (int iy = iy0; iy < iy1; ++iy) imap.ids[tau][imap.grid.index(ix, iy)] = id;
  }
}

// Two blocks whose hull-edge gap at each timestep is gaps[tau] meters.
InstanceMap two_block_sequence(const std::vector<double>& gaps) {
  const GridSpec grid = fine_grid();
  InstanceMap imap = InstanceMap::zeros(grid, static_cast<int>(gaps.size()));
  for (size_t tau = 0; tau < gaps.size(); ++tau) {
    paint(imap, static_cast<int>(tau), 1, 100, 108, 100, 104);  // right edge x = 10.8
    const int bx0 = 108 + static_cast<int>(std::lround(gaps[tau] * 10.0));
    paint(imap, static_cast<int>(tau), 2, bx0, bx0 + 8, 100, 104);
  }
  return imap;
}

AccidentReport occurred_report(int id_a, int id_b, Vec2 pa, Vec2 pb, double time,
                               double min_distance = 0.0) {
  AccidentReport r;
  r.occurred = true;
  r.ids = {id_a, id_b};
  r.positions = {pa, pb};
  r.time = time;
  r.min_distance = min_distance;
  return r;
}

MatchCounts counts_with(int tp, int fp, int fn) {
  MatchCounts c;
  for (const double d : kApaThresholds) {
    c.tp[d] = tp;
    c.fp[d] = fp;
    c.fn[d] = fn;
  }
  return c;
}

}  // namespace

TEST_CASE("detect_accident fixtures") {
  // closest approach 0.8 m at timestep 3 -> accident at t = 1.5 s
  const InstanceMap near = two_block_sequence({2.0, 1.5, 1.2, 0.8, 1.4});
  const AccidentReport r = detect_accident(near);
  CHECK(r.occurred);
  CHECK(r.ids == std::array<int, 2>{1, 2});
  CHECK(r.time == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(r.min_distance == doctest::Approx(0.8).epsilon(1e-9));
  // positions are the instance centroids at the closest timestep
  CHECK(r.positions[0].x == doctest::Approx(10.4).epsilon(1e-9));
  CHECK(r.positions[1].x == doctest::Approx(12.0).epsilon(1e-9));

  // never closer than 1.5 m -> no accident, ids cleared, distance kept
  const AccidentReport far = detect_accident(two_block_sequence({2.0, 1.5, 1.5, 1.5, 1.8}));
  CHECK_FALSE(far.occurred);
  CHECK(far.ids == std::array<int, 2>{0, 0});
  CHECK(far.min_distance == doctest::Approx(1.5).epsilon(1e-9));

  // single instance: nothing to collide with
  InstanceMap lone = InstanceMap::zeros(fine_grid(), 3);
  for (int tau = 0; tau < 3; ++tau) paint(lone, tau, 5, 100, 108, 100, 104);
  const AccidentReport none = detect_accident(lone);
  CHECK_FALSE(none.occurred);
  CHECK(std::isinf(none.min_distance));

  // overlap counts as distance zero at the first overlapping timestep
  const AccidentReport touch = detect_accident(two_block_sequence({1.2, 0.0, 0.0}));
  CHECK(touch.occurred);
  CHECK(touch.min_distance == 0.0);
  CHECK(touch.time == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("detect_accident against a brute-force oracle") {
  const GridSpec grid{0.0, 30.0, 0.0, 30.0, 0.5};
  Rng rng(424242);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int steps = 2 + static_cast<int>(rng.uniform_int(4));
    const int n_inst = 1 + static_cast<int>(rng.uniform_int(4));
    InstanceMap imap = InstanceMap::zeros(grid, steps);
    struct Block {
      double x, y, vx, vy;
      int w, h;
    };
    std::vector<Block> blocks;
    for (int i = 0; i < n_inst; ++i) {
      blocks.push_back({5.0 + rng.uniform() * 20.0, 5.0 + rng.uniform() * 20.0,
                        rng.uniform() * 4.0 - 2.0, rng.uniform() * 4.0 - 2.0,
                        2 + static_cast<int>(rng.uniform_int(6)),
                        2 + static_cast<int>(rng.uniform_int(4))});
    }
    for (int tau = 0; tau < steps; ++tau) {
      for (int i = 0; i < n_inst; ++i) {
        const auto& b = blocks[i];
        const auto cell = grid.cell_of({b.x + b.vx * tau, b.y + b.vy * tau});
        if (!cell) continue;
        const int ix0 = std::max(0, cell->first), iy0 = std::max(0, cell->second);
        // later ids overwrite earlier ones on contested cells, same as paint order
        paint(imap, tau, i + 1, ix0, std::min(grid.nx(), ix0 + b.w),
              iy0, std::min(grid.ny(), iy0 + b.h));
      }
    }

    // independent oracle: all pairs, all timesteps, strict-min scan
    AccidentReport oracle;
    for (int tau = 0; tau < steps; ++tau) {
      const auto polys = instances_to_polygons(imap, tau);
      for (size_t a = 0; a < polys.size(); ++a) {
        for (size_t b = a + 1; b < polys.size(); ++b) {
          const double d = polygon_min_distance(polys[a].second, polys[b].second);
          if (d < oracle.min_distance) {
            oracle.min_distance = d;
            oracle.ids = {std::min(polys[a].first, polys[b].first),
                          std::max(polys[a].first, polys[b].first)};
            oracle.time = tau * kBevDt;
          }
        }
      }
    }
    oracle.occurred = oracle.min_distance <= kDangerDistance;

    const AccidentReport got = detect_accident(imap);
    REQUIRE(got.occurred == oracle.occurred);
    if (got.occurred) {
      REQUIRE(got.ids == oracle.ids);
      REQUIRE(got.time == doctest::Approx(oracle.time).epsilon(1e-12));
      REQUIRE(got.min_distance == doctest::Approx(oracle.min_distance).epsilon(1e-9));
    }
    ++checked;
  }
  CHECK(checked == 500);
}

TEST_CASE("declare_any picks the safest story") {
  const AccidentReport a = occurred_report(1, 2, {0, 0}, {1, 0}, 1.0, 0.9);
  const AccidentReport b = occurred_report(1, 2, {0, 0}, {1, 0}, 1.5, 0.4);
  AccidentReport miss;
  miss.min_distance = 3.0;

  // any occurred sample declares an accident; the closest one wins
  const AccidentReport any = declare_any({miss, a, b});
  CHECK(any.occurred);
  CHECK(any.min_distance == doctest::Approx(0.4));
  CHECK(any.time == doctest::Approx(1.5));

  // ties on distance resolve to the earlier time
  const AccidentReport tied = declare_any({b, occurred_report(3, 4, {0, 0}, {1, 0}, 0.5, 0.4)});
  CHECK(tied.time == doctest::Approx(0.5));

  // no occurred sample: the closest call is reported, still non-occurred
  AccidentReport far;
  far.min_distance = 5.0;
  const AccidentReport quiet = declare_any({far, miss});
  CHECK_FALSE(quiet.occurred);
  CHECK(quiet.min_distance == doctest::Approx(3.0));
}

TEST_CASE("match_accident and accumulation") {
  const AccidentReport gt = occurred_report(1, 2, {0, 0}, {10, 0}, 2.0);
  // total position difference 7 m (3.5 m per agent)
  const AccidentReport pred = occurred_report(1, 2, {3.5, 0}, {13.5, 0}, 2.0);
  CHECK(accident_position_difference(pred, gt) == doctest::Approx(7.0));
  CHECK(match_accident(pred, gt, 5.0) == MatchOutcome::kFalseBoth);
  CHECK(match_accident(pred, gt, 10.0) == MatchOutcome::kTruePositive);
  CHECK(match_accident(pred, gt, 15.0) == MatchOutcome::kTruePositive);

  AccidentReport quiet;
  quiet.min_distance = 2.0;
  CHECK(match_accident(quiet, gt, 10.0) == MatchOutcome::kFalseNegative);
  CHECK(match_accident(pred, quiet, 10.0) == MatchOutcome::kFalsePositive);
  CHECK(match_accident(quiet, quiet, 10.0) == MatchOutcome::kNone);

  // crossed id assignment is allowed when it reduces the error
  const AccidentReport crossed = occurred_report(3, 4, {10, 0}, {0, 0}, 2.0);
  CHECK(accident_position_difference(crossed, gt) == doctest::Approx(0.0));

  MatchCounts counts;
  accumulate_match(counts, pred, gt);
  CHECK(counts.fp.at(5.0) == 1);  // FalseBoth books both errors
  CHECK(counts.fn.at(5.0) == 1);
  CHECK(counts.tp.at(10.0) == 1);
  CHECK(counts.tp.at(15.0) == 1);
  accumulate_match(counts, quiet, gt);
  CHECK(counts.fn.at(10.0) == 1);

  // TP at a tight threshold stays TP at a looser one
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double dx = rng.uniform() * 12.0;
    const AccidentReport p = occurred_report(1, 2, {dx, 0}, {10 + dx, 0}, 2.0);
    bool prev_tp = false;
    for (const double d : kApaThresholds) {
      const bool tp = match_accident(p, gt, d) == MatchOutcome::kTruePositive;
      if (prev_tp) CHECK(tp);
      prev_tp = tp;
    }
  }
}

TEST_CASE("apa arithmetic") {
  CHECK(apa(counts_with(1, 0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(apa(counts_with(3, 1, 2)) == doctest::Approx(3.0 / 4.5).epsilon(1e-12));
  CHECK(apa(counts_with(0, 2, 1)) == doctest::Approx(0.0).epsilon(1e-12));

  // per-threshold fractions (0, 1, 1) average to 2/3
  MatchCounts mixed;
  mixed.fp[5.0] = 1;
  mixed.fn[5.0] = 1;
  mixed.tp[10.0] = 1;
  mixed.tp[15.0] = 1;
  CHECK(apa(mixed) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // vacuous thresholds: perfect by default, zero when asked
  CHECK(apa(MatchCounts{}) == doctest::Approx(1.0));
  CHECK(apa(MatchCounts{}, false) == doctest::Approx(0.0));

  // scale invariance in the counts
  CHECK(apa(counts_with(6, 2, 4)) == doctest::Approx(apa(counts_with(3, 1, 2))).epsilon(1e-12));

  // monotone: adding a TP never hurts, adding FP/FN never helps
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int tp = static_cast<int>(rng.uniform_int(5));
    const int fp = static_cast<int>(rng.uniform_int(5));
    const int fn = static_cast<int>(rng.uniform_int(5));
    if (tp + fp + fn == 0) continue;
    const double base = apa(counts_with(tp, fp, fn), false);
    CHECK(apa(counts_with(tp + 1, fp, fn), false) >= base - 1e-12);
    CHECK(apa(counts_with(tp, fp + 1, fn), false) <= base + 1e-12);
    CHECK(apa(counts_with(tp, fp, fn + 1), false) <= base + 1e-12);
  }
}

TEST_CASE("tp_metrics arithmetic") {
  const AccidentReport gt = occurred_report(1, 2, {0, 0}, {10, 0}, 2.0);
  const auto ident = tp_metrics({{gt, gt}});
  CHECK(ident.id_error_mean == 0.0);
  CHECK(ident.position_error_mean == 0.0);
  CHECK(ident.time_error_mean == 0.0);
  CHECK(ident.count == 1);

  const AccidentReport late = occurred_report(1, 2, {0, 0}, {10, 0}, 2.5);
  CHECK(tp_metrics({{late, gt}}).time_error_mean == doctest::Approx(0.5));

  // position errors 2 m and 4 m -> mean 3 m; one id mismatch of two -> 0.5
  const AccidentReport off2 = occurred_report(1, 2, {2, 0}, {10, 0}, 2.0);
  const AccidentReport off4 = occurred_report(1, 3, {4, 0}, {10, 0}, 2.0);
  const auto stats = tp_metrics({{off2, gt}, {off4, gt}});
  CHECK(stats.position_error_mean == doctest::Approx(3.0));
  CHECK(stats.id_error_mean == doctest::Approx(0.5));
  CHECK(tp_metrics({}).count == 0);
}

TEST_CASE("miou arithmetic") {
  const std::vector<std::vector<float>> a = {{1, 1, 0, 0}, {0, 0, 0, 0}};
  const std::vector<std::vector<float>> b = {{0, 0, 1, 1}, {0, 0, 0, 0}};
  const std::vector<std::vector<float>> c = {{1, 0, 1, 0}, {0, 0, 0, 0}};
  CHECK(miou(a, a) == doctest::Approx(1.0));                 // identical
  CHECK(miou(a, b) == doctest::Approx(0.5));                 // disjoint step + empty step
  CHECK(miou(a, c) == doctest::Approx((1.0 / 3.0 + 1) / 2)); // one-of-three overlap
  CHECK(miou({{1, 1, 0, 0}}, {{1, 0, 1, 0}}) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(miou(a, {{1, 1, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(miou({{1, 0}}, {{1, 0, 0}}), std::invalid_argument);
}

TEST_CASE("vpq arithmetic") {
  const GridSpec grid{0.0, 10.0, 0.0, 10.0, 0.5};
  InstanceMap gt = InstanceMap::zeros(grid, 2);
  paint(gt, 0, 1, 2, 6, 2, 6);
  paint(gt, 1, 1, 3, 7, 2, 6);
  paint(gt, 0, 2, 10, 14, 10, 14);
  paint(gt, 1, 2, 10, 14, 11, 15);

  CHECK(vpq(gt, gt) == doctest::Approx(1.0));  // perfect roundtrip

  // one extra predicted instance alongside two perfect matches:
  // (1 + 1) / (2 + 0.5) = 0.8
  InstanceMap extra = gt;
  paint(extra, 0, 9, 16, 18, 16, 18);
  paint(extra, 1, 9, 16, 18, 16, 18);
  CHECK(vpq(extra, gt) == doctest::Approx(2.0 / 2.5));

  // empty prediction vs ground truth with instances -> 0
  CHECK(vpq(InstanceMap::zeros(grid, 2), gt) == doctest::Approx(0.0));

  // both empty -> vacuously perfect
  CHECK(vpq(InstanceMap::zeros(grid, 2), InstanceMap::zeros(grid, 2)) == doctest::Approx(1.0));

  // an id that drifts too far mid-sequence loses its match entirely
  InstanceMap drift = gt;
  for (int ix = 0; ix < grid.nx(); ++ix) {
    for (int iy = 0; iy < grid.ny(); ++iy) {
      if (drift.ids[1][grid.index(ix, iy)] == 1) drift.ids[1][grid.index(ix, iy)] = 0;
    }
  }
  paint(drift, 1, 1, 14, 18, 2, 6);  // far from the gt footprint at step 1
  CHECK(vpq(drift, gt) < 1.0);
}

TEST_CASE("detection_map arithmetic") {
  DetectionSample perfect;
  perfect.gts = {{AgentClass::kCar, {1.0, 2.0}, 1.0}, {AgentClass::kTruck, {8.0, -3.0}, 1.0}};
  perfect.preds = perfect.gts;
  CHECK(detection_map({perfect}) == doctest::Approx(1.0));

  // a single detection 1.5 m off: misses at 1 m, hits at 2 m and 4 m
  DetectionSample off;
  off.gts = {{AgentClass::kCar, {0.0, 0.0}, 1.0}};
  off.preds = {{AgentClass::kCar, {1.5, 0.0}, 0.9}};
  CHECK(detection_map({off}) == doctest::Approx(2.0 / 3.0));

  // no predictions at all -> 0; no ground truth -> 0 by convention
  DetectionSample empty_pred;
  empty_pred.gts = off.gts;
  CHECK(detection_map({empty_pred}) == doctest::Approx(0.0));
  CHECK(detection_map({}) == doctest::Approx(0.0));

  // a higher-scored false positive ahead of the true hit caps every
  // 11-point precision at 0.5
  DetectionSample dup;
  dup.gts = off.gts;
  dup.preds = {{AgentClass::kCar, {9.0, 0.0}, 0.9}, {AgentClass::kCar, {0.1, 0.0}, 0.8}};
  CHECK(detection_map({dup}) == doctest::Approx(0.5));
}
