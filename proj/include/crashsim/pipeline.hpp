#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crashsim/io.hpp"
#include "crashsim/metrics.hpp"
#include "crashsim/scenario.hpp"
#include "crashsim/sim.hpp"
#include "crashsim/v2x.hpp"

namespace crashsim {

// Deterministic seed combiner (splitmix64-style finalizer).
uint64_t hash_combine(uint64_t h, uint64_t v);

// The map implied by a scenario config alone (so that evaluation can rebuild
// it from a log header and verify the digest). Normal scenarios derive
// topology/signalization from the seed.
IntersectionMap map_for_config(const ScenarioConfig& config);

struct GenerateOptions {
  std::string out_dir;
  int n_scenarios = 100;
  std::vector<ScenarioType> types;  // cycled; empty = all accident types + normal
  uint64_t seed = 0;
  bool write_files = true;
};

struct GenerateSummary {
  std::map<ScenarioType, int> per_type;
  int n_accident = 0;
  int n_collided = 0;
  DatasetManifest manifest;
  std::vector<ScenarioLog> logs;  // retained only when write_files is false
};

GenerateSummary generate_dataset(const GenerateOptions& opts);

struct EvalOptions {
  std::string config_name = "single";
  int future_steps = kDefaultFutureSteps;  // 4 = 2 s, 6 = 3 s, 8 = 4 s
  int samples = 5;                         // jittered variants on top of the mean field
  double noise_mu = 0.0;
  double noise_sigma = 0.0;
  double latency = 0.0;
  std::string split = "test";  // empty = all splits
  uint64_t seed = 0;           // degradation/jitter base seed
};

struct AccidentBlock {
  MatchCounts counts;
  double apa_value = 1.0;
  int windows = 0;
  int gt_positive = 0;
  TpErrorStats tp;
};

struct TtcRow {
  std::string label;  // e.g. "(3,4]"
  int windows = 0;
  std::optional<double> apa_value;  // empty when no windows fall in the stratum
  MatchCounts counts;
};

struct EvalReport {
  EvalOptions options;
  int n_scenarios = 0;
  int n_windows = 0;
  double miou_mean = 0.0;
  double vpq_mean = 0.0;
  double detection_map_value = 0.0;
  AccidentBlock overall, visible, invisible;
  std::vector<TtcRow> ttc;  // strata (0,1] .. (3,4] seconds, label "ks"
};

// Core evaluation over in-memory logs (reused by the dataset entry point and
// the test harness).
EvalReport evaluate_logs(const std::vector<ScenarioLog>& logs, const EvalOptions& opts);

// Loads the manifest in dataset_dir, filters by opts.split, verifies map
// digests and runs evaluate_logs. Throws std::runtime_error on data errors.
EvalReport evaluate_dataset(const std::string& dataset_dir, const EvalOptions& opts);

void write_report(const EvalReport& report, const std::string& path);
EvalReport read_report(const std::string& path);

// Markdown comparison table across reports (one row per report).
std::string render_report_table(const std::vector<EvalReport>& reports);

}  // namespace crashsim
