#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "crashsim/bev.hpp"
#include "crashsim/geometry.hpp"

namespace crashsim {

constexpr double kDangerDistance = 1.0;  // meters
inline const std::array<double, 3> kApaThresholds = {5.0, 10.0, 15.0};
constexpr double kTpThreshold = 10.0;  // meters, for the TP error metrics

struct AccidentReport {
  bool occurred = false;
  std::array<int, 2> ids = {0, 0};  // sorted ascending when occurred
  std::array<Vec2, 2> positions;    // aligned with ids
  double time = 0.0;                // seconds from the window start
  double min_distance = std::numeric_limits<double>::infinity();
};

struct MatchCounts {
  std::map<double, int> tp, fp, fn;

  MatchCounts();
  MatchCounts& operator+=(const MatchCounts& o);
};

struct TpErrorStats {
  double id_error_mean = 0.0;
  double position_error_mean = 0.0;
  double time_error_mean = 0.0;
  int count = 0;
};

// Closest-pair scan over all instance pairs and timesteps; the globally
// closest pair decides the report (ties: earlier timestep, lower id pair).
AccidentReport detect_accident(const InstanceMap& imap, double step_dt = kBevDt,
                               double danger_threshold = kDangerDistance);

// Safety-first aggregation over the sampled predictions.
AccidentReport declare_any(const std::vector<AccidentReport>& reports);

enum class MatchOutcome { kNone, kTruePositive, kFalsePositive, kFalseNegative, kFalseBoth };

MatchOutcome match_accident(const AccidentReport& pred, const AccidentReport& gt, double d);

// Total position difference over the two colliding agents, matched by id when
// the id pairs coincide, otherwise greedily by position.
double accident_position_difference(const AccidentReport& pred, const AccidentReport& gt);

void accumulate_match(MatchCounts& counts, const AccidentReport& pred, const AccidentReport& gt);

// Eq.-style mean over the thresholds of TP / (TP + FP/2 + FN/2). A threshold
// with no accidents anywhere contributes 1 when vacuous_is_perfect.
double apa(const MatchCounts& counts, bool vacuous_is_perfect = true);

TpErrorStats tp_metrics(const std::vector<std::pair<AccidentReport, AccidentReport>>& tp_pairs);

// Mean-over-timesteps IoU of thresholded segmentation. Throws on shape
// mismatch. A timestep empty on both sides counts as IoU 1.
double miou(const std::vector<std::vector<float>>& pred, const std::vector<std::vector<float>>& gt,
            double threshold = 0.5);

// Video panoptic quality: sequence-consistent instance matching at IoU > 0.5.
double vpq(const InstanceMap& pred, const InstanceMap& gt);

struct DetectionBox {
  AgentClass cls = AgentClass::kCar;
  Vec2 center;
  double score = 1.0;  // ignored for ground truth
};

struct DetectionSample {
  std::vector<DetectionBox> preds;
  std::vector<DetectionBox> gts;
};

// Center-distance mAP over thresholds {1,2,4} m and the classes present in
// the ground truth; 11-point interpolated AP.
double detection_map(const std::vector<DetectionSample>& samples);

}  // namespace crashsim
