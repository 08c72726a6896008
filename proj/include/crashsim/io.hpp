#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crashsim/bev.hpp"
#include "crashsim/scenario.hpp"
#include "crashsim/sim.hpp"

namespace crashsim {

inline constexpr const char* kLogFormat = "crashsim-log-1";
inline constexpr const char* kManifestFormat = "crashsim-dataset-1";
inline constexpr const char* kGridMagic = "BEVGRID1";

// Stable hex digest of the map parameters; deterministic across runs, used
// to verify that a rebuilt map matches the one a log was generated with.
std::string map_digest(const IntersectionMap& map);

// JSON-lines scenario log: header line, one line per frame, trailing
// termination record. Readers throw std::runtime_error naming the offending
// line on malformed or truncated input.
void write_scenario_log(const ScenarioLog& log, const std::string& path);
ScenarioLog read_scenario_log(const std::string& path);

// Versioned little-endian binary container for the BEV channels.
void write_motion_field(const MotionField& field, const std::string& path);
MotionField read_motion_field(const std::string& path);

struct ManifestEntry {
  int id = 0;
  ScenarioType type = ScenarioType::kNormal;
  uint64_t seed = 0;
  std::string split;  // train | val | test
  std::string path;   // log path relative to the manifest directory
  std::string termination;
  std::optional<double> collision_time;
};

struct DatasetManifest {
  std::string version = kManifestFormat;
  std::array<double, 3> ratios = {0.7, 0.15, 0.15};
  std::vector<ManifestEntry> entries;
};

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

// Deterministic CSV: rows of preformatted cells.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest-roundtrip-ish numeric formatting used in CSV cells (%.9g).
std::string format_number(double v);

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Self-contained SVG line plot (axes, ticks, legend); one polyline per
// series.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

}  // namespace crashsim
