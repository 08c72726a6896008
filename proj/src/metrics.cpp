#include "crashsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace crashsim {

MatchCounts::MatchCounts() {
  for (const double d : kApaThresholds) {
    tp[d] = 0;
    fp[d] = 0;
    fn[d] = 0;
  }
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  for (const double d : kApaThresholds) {
    tp[d] += o.tp.at(d);
    fp[d] += o.fp.at(d);
    fn[d] += o.fn.at(d);
  }
  return *this;
}

AccidentReport detect_accident(const InstanceMap& imap, double step_dt, double danger_threshold) {
  AccidentReport report;
  for (int tau = 0; tau < imap.steps(); ++tau) {
    const auto polys = instances_to_polygons(imap, tau);
    for (size_t i = 0; i < polys.size(); ++i) {
      for (size_t j = i + 1; j < polys.size(); ++j) {
        const double d = polygon_min_distance(polys[i].second, polys[j].second);
        if (d < report.min_distance) {
          report.min_distance = d;
          report.ids = {std::min(polys[i].first, polys[j].first),
                        std::max(polys[i].first, polys[j].first)};
          const Vec2 ci = polys[i].second.centroid();
          const Vec2 cj = polys[j].second.centroid();
          if (polys[i].first <= polys[j].first) {
            report.positions = {ci, cj};
          } else {
            report.positions = {cj, ci};
          }
          report.time = tau * step_dt;
        }
      }
    }
  }
  report.occurred = report.min_distance <= danger_threshold;
  if (!report.occurred) {
    report.ids = {0, 0};
  }
  return report;
}

AccidentReport declare_any(const std::vector<AccidentReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("declare_any: no reports");
  const AccidentReport* best = nullptr;
  for (const auto& r : reports) {
    if (!r.occurred) continue;
    if (best == nullptr || r.min_distance < best->min_distance ||
        (r.min_distance == best->min_distance && r.time < best->time)) {
      best = &r;
    }
  }
  if (best != nullptr) return *best;
  // No sample predicted an accident; return the closest-call report.
  const AccidentReport* closest = &reports.front();
  for (const auto& r : reports) {
    if (r.min_distance < closest->min_distance) closest = &r;
  }
  return *closest;
}

double accident_position_difference(const AccidentReport& pred, const AccidentReport& gt) {
  if (pred.ids == gt.ids) {
    return (pred.positions[0] - gt.positions[0]).norm() +
           (pred.positions[1] - gt.positions[1]).norm();
  }
  // Greedy positional pairing over the 2x2 alternatives.
  const double straight = (pred.positions[0] - gt.positions[0]).norm() +
                          (pred.positions[1] - gt.positions[1]).norm();
  const double crossed = (pred.positions[0] - gt.positions[1]).norm() +
                         (pred.positions[1] - gt.positions[0]).norm();
  return std::min(straight, crossed);
}

MatchOutcome match_accident(const AccidentReport& pred, const AccidentReport& gt, double d) {
  if (!pred.occurred && !gt.occurred) return MatchOutcome::kNone;
  if (pred.occurred && !gt.occurred) return MatchOutcome::kFalsePositive;
  if (!pred.occurred && gt.occurred) return MatchOutcome::kFalseNegative;
  if (accident_position_difference(pred, gt) < d) return MatchOutcome::kTruePositive;
  return MatchOutcome::kFalseBoth;
}

void accumulate_match(MatchCounts& counts, const AccidentReport& pred, const AccidentReport& gt) {
  for (const double d : kApaThresholds) {
    switch (match_accident(pred, gt, d)) {
      case MatchOutcome::kNone:
        break;
      case MatchOutcome::kTruePositive:
        ++counts.tp[d];
        break;
      case MatchOutcome::kFalsePositive:
        ++counts.fp[d];
        break;
      case MatchOutcome::kFalseNegative:
        ++counts.fn[d];
        break;
      case MatchOutcome::kFalseBoth:
        ++counts.fp[d];
        ++counts.fn[d];
        break;
    }
  }
}

double apa(const MatchCounts& counts, bool vacuous_is_perfect) {
  double sum = 0.0;
  for (const double d : kApaThresholds) {
    const double tp = counts.tp.at(d);
    const double fp = counts.fp.at(d);
    const double fn = counts.fn.at(d);
    const double denom = tp + 0.5 * fp + 0.5 * fn;
    if (denom == 0.0) {
      sum += vacuous_is_perfect ? 1.0 : 0.0;
    } else {
      sum += tp / denom;
    }
  }
  return sum / static_cast<double>(kApaThresholds.size());
}

TpErrorStats tp_metrics(const std::vector<std::pair<AccidentReport, AccidentReport>>& tp_pairs) {
  TpErrorStats stats;
  stats.count = static_cast<int>(tp_pairs.size());
  if (tp_pairs.empty()) return stats;
  for (const auto& [pred, gt] : tp_pairs) {
    stats.id_error_mean += pred.ids == gt.ids ? 0.0 : 1.0;
    stats.position_error_mean += accident_position_difference(pred, gt);
    stats.time_error_mean += std::abs(pred.time - gt.time);
  }
  stats.id_error_mean /= stats.count;
  stats.position_error_mean /= stats.count;
  stats.time_error_mean /= stats.count;
  return stats;
}

double miou(const std::vector<std::vector<float>>& pred, const std::vector<std::vector<float>>& gt,
            double threshold) {
  if (pred.size() != gt.size()) throw std::invalid_argument("miou: timestep count mismatch");
  if (pred.empty()) return 1.0;
  double sum = 0.0;
  for (size_t tau = 0; tau < pred.size(); ++tau) {
    if (pred[tau].size() != gt[tau].size()) throw std::invalid_argument("miou: grid shape mismatch");
    long inter = 0, uni = 0;
    for (size_t i = 0; i < pred[tau].size(); ++i) {
      const bool p = pred[tau][i] > threshold;
      const bool g = gt[tau][i] > threshold;
      inter += (p && g) ? 1 : 0;
      uni += (p || g) ? 1 : 0;
    }
    sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return sum / static_cast<double>(pred.size());
}

double vpq(const InstanceMap& pred, const InstanceMap& gt) {
  if (pred.steps() != gt.steps()) throw std::invalid_argument("vpq: timestep count mismatch");
  const int steps = pred.steps();
  const int n = gt.grid.size();

  std::set<int> pred_ids, gt_ids;
  // Per (pred id, gt id) pair: per-timestep intersection cell counts.
  std::map<std::pair<int, int>, std::vector<long>> inter;
  std::map<int, std::vector<long>> pred_area, gt_area;
  for (int tau = 0; tau < steps; ++tau) {
    for (int i = 0; i < n; ++i) {
      const int p = pred.ids[tau][i];
      const int g = gt.ids[tau][i];
      if (p != 0) {
        pred_ids.insert(p);
        auto& v = pred_area[p];
        v.resize(steps, 0);
        ++v[tau];
      }
      if (g != 0) {
        gt_ids.insert(g);
        auto& v = gt_area[g];
        v.resize(steps, 0);
        ++v[tau];
      }
      if (p != 0 && g != 0) {
        auto& v = inter[{p, g}];
        v.resize(steps, 0);
        ++v[tau];
      }
    }
  }

  // A pair is a sequence TP when, at every timestep where either instance
  // exists, both exist and the per-timestep IoU exceeds 0.5.
  struct TpPair {
    int p, g;
    double iou;  // aggregated over the sequence
  };
  std::vector<TpPair> candidates;
  for (const auto& [key, ivec] : inter) {
    const auto& pa = pred_area.at(key.first);
    const auto& ga = gt_area.at(key.second);
    bool consistent = true;
    long inter_sum = 0, union_sum = 0;
    for (int tau = 0; tau < steps && consistent; ++tau) {
      const long p_a = tau < static_cast<int>(pa.size()) ? pa[tau] : 0;
      const long g_a = tau < static_cast<int>(ga.size()) ? ga[tau] : 0;
      const long in = tau < static_cast<int>(ivec.size()) ? ivec[tau] : 0;
      if (p_a == 0 && g_a == 0) continue;
      const long un = p_a + g_a - in;
      if (in == 0 || static_cast<double>(in) / static_cast<double>(un) <= 0.5) consistent = false;
      inter_sum += in;
      union_sum += un;
    }
    if (consistent && union_sum > 0) {
      candidates.push_back(
          {key.first, key.second, static_cast<double>(inter_sum) / static_cast<double>(union_sum)});
    }
  }
  // IoU > 0.5 pairs are unique per id on both sides, but keep a greedy pass
  // for safety.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const TpPair& a, const TpPair& b) { return a.iou > b.iou; });
  std::set<int> used_p, used_g;
  double iou_sum = 0.0;
  int tp = 0;
  for (const auto& c : candidates) {
    if (used_p.count(c.p) || used_g.count(c.g)) continue;
    used_p.insert(c.p);
    used_g.insert(c.g);
    iou_sum += c.iou;
    ++tp;
  }
  const int fp = static_cast<int>(pred_ids.size()) - tp;
  const int fn = static_cast<int>(gt_ids.size()) - tp;
  const double denom = tp + 0.5 * fp + 0.5 * fn;
  if (denom == 0.0) return 1.0;  // both sequences empty
  return iou_sum / denom;
}

namespace {

constexpr std::array<double, 3> kCenterDistanceThresholds = {1.0, 2.0, 4.0};

double average_precision(std::vector<std::pair<double, bool>> scored_hits, int n_gt) {
  if (n_gt == 0) return 0.0;
  std::stable_sort(scored_hits.begin(), scored_hits.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> precision, recall;
  int tp = 0, fp = 0;
  for (const auto& [score, hit] : scored_hits) {
    (void)score;
    hit ? ++tp : ++fp;
    precision.push_back(static_cast<double>(tp) / (tp + fp));
    recall.push_back(static_cast<double>(tp) / n_gt);
  }
  // 11-point interpolation.
  double ap = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double r = k / 10.0;
    double best = 0.0;
    for (size_t i = 0; i < precision.size(); ++i) {
      if (recall[i] >= r) best = std::max(best, precision[i]);
    }
    ap += best / 11.0;
  }
  return ap;
}

}  // namespace

double detection_map(const std::vector<DetectionSample>& samples) {
  std::set<AgentClass> classes;
  for (const auto& s : samples) {
    for (const auto& g : s.gts) classes.insert(g.cls);
  }
  if (classes.empty()) return 0.0;

  double sum = 0.0;
  int terms = 0;
  for (const AgentClass cls : classes) {
    for (const double thresh : kCenterDistanceThresholds) {
      std::vector<std::pair<double, bool>> scored_hits;
      int n_gt = 0;
      for (const auto& sample : samples) {
        std::vector<const DetectionBox*> gts;
        for (const auto& g : sample.gts) {
          if (g.cls == cls) gts.push_back(&g);
        }
        n_gt += static_cast<int>(gts.size());
        std::vector<const DetectionBox*> preds;
        for (const auto& p : sample.preds) {
          if (p.cls == cls) preds.push_back(&p);
        }
        std::stable_sort(preds.begin(), preds.end(),
                         [](const DetectionBox* a, const DetectionBox* b) {
                           return a->score > b->score;
                         });
        std::vector<bool> taken(gts.size(), false);
        for (const auto* p : preds) {
          double best_d = std::numeric_limits<double>::infinity();
          int best_g = -1;
          for (size_t g = 0; g < gts.size(); ++g) {
            if (taken[g]) continue;
            const double d = (p->center - gts[g]->center).norm();
            if (d < best_d) {
              best_d = d;
              best_g = static_cast<int>(g);
            }
          }
          if (best_g >= 0 && best_d < thresh) {
            taken[best_g] = true;
            scored_hits.emplace_back(p->score, true);
          } else {
            scored_hits.emplace_back(p->score, false);
          }
        }
      }
      sum += average_precision(std::move(scored_hits), n_gt);
      ++terms;
    }
  }
  return sum / terms;
}

}  // namespace crashsim
