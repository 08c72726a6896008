#include "crashsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "crashsim/bev.hpp"

namespace crashsim {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t hash_combine(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4);
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

IntersectionMap map_for_config(const ScenarioConfig& config) {
  Topology topology;
  bool signalized;
  if (scenario_is_accident(config.type)) {
    topology = scenario_topology(config.type);
    signalized = scenario_is_signalized(config.type);
  } else {
    Rng rng(hash_combine(config.seed, 0x6d617033ULL));
    topology = rng.uniform() < 0.5 ? Topology::kFourWay : Topology::kThreeWay;
    signalized = rng.uniform() < 0.5;
  }
  return build_map(topology, signalized, config.seed);
}

GenerateSummary generate_dataset(const GenerateOptions& opts) {
  std::vector<ScenarioType> types = opts.types;
  if (types.empty()) types = all_scenario_types();

  GenerateSummary summary;
  std::vector<ScenarioType> entry_types;

  fs::path out_dir(opts.out_dir);
  if (opts.write_files) fs::create_directories(out_dir / "logs");

  for (int i = 0; i < opts.n_scenarios; ++i) {
    const ScenarioType type = types[static_cast<size_t>(i) % types.size()];
    uint64_t seed_i = hash_combine(opts.seed, static_cast<uint64_t>(i));

    ScenarioConfig config;
    std::optional<ScenarioLog> log;
    IntersectionMap map;
    for (int attempt = 0; attempt < 20 && !log; ++attempt) {
      config = ScenarioConfig{};
      config.type = type;
      config.seed = hash_combine(seed_i, static_cast<uint64_t>(attempt));
      Rng meta(hash_combine(config.seed, 0x636f6e66ULL));
      config.n_background_vehicles = 2 + static_cast<int>(meta.uniform_int(3));
      config.n_pedestrians = 1 + static_cast<int>(meta.uniform_int(2));
      static const char* kWeather[] = {"clear", "rain", "fog"};
      static const char* kTimeofday[] = {"noon", "sunset", "night"};
      config.weather_tag = kWeather[meta.uniform_int(3)];
      config.timeofday_tag = kTimeofday[meta.uniform_int(3)];
      try {
        map = map_for_config(config);
        const SpawnPlan plan = spawn_scenario(config, map);
        log = run_scenario(plan, config, map);
        log->map_digest = map_digest(map);
      } catch (const std::runtime_error&) {
        log.reset();  // infeasible spawn draw; retry with a reseeded config
      }
    }
    if (!log) throw std::runtime_error("could not generate a feasible scenario after 20 reseeds");

    summary.per_type[type] += 1;
    if (scenario_is_accident(type)) {
      summary.n_accident += 1;
      if (log->termination == TerminationReason::kCollision) summary.n_collided += 1;
    }

    char name[32];
    std::snprintf(name, sizeof(name), "logs/%06d.jsonl", i);
    ManifestEntry entry;
    entry.id = i;
    entry.type = type;
    entry.seed = config.seed;
    entry.path = name;
    entry.termination = termination_reason_name(log->termination);
    if (log->collision) entry.collision_time = log->collision->t;
    summary.manifest.entries.push_back(entry);
    entry_types.push_back(type);

    if (opts.write_files) {
      write_scenario_log(*log, (out_dir / name).string());
    } else {
      summary.logs.push_back(std::move(*log));
    }
  }

  const SplitResult split = split_dataset(entry_types, hash_combine(opts.seed, 0x73706c74ULL));
  for (const size_t idx : split.train) summary.manifest.entries[idx].split = "train";
  for (const size_t idx : split.val) summary.manifest.entries[idx].split = "val";
  for (const size_t idx : split.test) summary.manifest.entries[idx].split = "test";

  if (opts.write_files) {
    write_manifest(summary.manifest, (out_dir / "manifest.json").string());
  }
  return summary;
}

namespace {

// Relabel decoded instance ids to the nearest ground-truth agent id so that
// accident id comparisons are meaningful. Unmatched instances get ids above
// kUnmatchedBase.
constexpr int kUnmatchedBase = 100000;
constexpr double kRelabelGate = 3.0;  // meters

InstanceMap relabel_to_agents(const InstanceMap& imap, const ScenarioLog& log, size_t k0,
                              const Pose2& ego_pose) {
  struct InstanceObs {
    int id;
    int first_step;
    Vec2 centroid;  // ego frame
  };
  std::map<int, InstanceObs> observed;
  std::map<int, std::pair<Vec2, int>> accum;  // per (id,step-local) centroid build
  for (int tau = 0; tau < imap.steps(); ++tau) {
    accum.clear();
    for (int ix = 0; ix < imap.grid.nx(); ++ix) {
      for (int iy = 0; iy < imap.grid.ny(); ++iy) {
        const int id = imap.ids[tau][imap.grid.index(ix, iy)];
        if (id == 0) continue;
        auto& [sum, n] = accum[id];
        sum = sum + imap.grid.cell_center(ix, iy);
        n += 1;
      }
    }
    for (const auto& [id, sn] : accum) {
      if (observed.count(id)) continue;
      observed[id] = {id, tau, sn.first / sn.second};
    }
  }

  struct Candidate {
    double dist;
    int inst_id;
    int agent_id;
  };
  std::vector<Candidate> candidates;
  for (const auto& [id, obs] : observed) {
    const size_t frame = k0 + static_cast<size_t>(obs.first_step) * kFrameStride;
    if (frame >= log.frames.size()) continue;
    for (const auto& agent : log.frames[frame].agents) {
      const Vec2 p = se2_apply_inverse(ego_pose, agent.pose.position());
      const double d = (p - obs.centroid).norm();
      if (d <= kRelabelGate) candidates.push_back({d, id, agent.id});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.inst_id != b.inst_id) return a.inst_id < b.inst_id;
    return a.agent_id < b.agent_id;
  });
  std::map<int, int> relabel;
  std::unordered_set<int> used_agents;
  for (const auto& c : candidates) {
    if (relabel.count(c.inst_id) || used_agents.count(c.agent_id)) continue;
    relabel[c.inst_id] = c.agent_id;
    used_agents.insert(c.agent_id);
  }
  int next_unmatched = kUnmatchedBase;
  for (const auto& [id, obs] : observed) {
    if (!relabel.count(id)) relabel[id] = next_unmatched++;
  }

  InstanceMap out = imap;
  for (auto& step : out.ids) {
    for (auto& id : step) {
      if (id != 0) id = relabel.at(id);
    }
  }
  return out;
}

// Log-level ground truth for the TTC table: occurred iff the recorded
// collision falls inside [t0, t0 + horizon].
AccidentReport log_gt_report(const ScenarioLog& log, size_t k0, double horizon_s,
                             const Pose2& ego_pose) {
  AccidentReport r;
  if (!log.collision) return r;
  const double t0 = log.frames[k0].t;
  const double tc = log.collision->t;
  if (tc < t0 - 1e-9 || tc > t0 + horizon_s + 1e-9) return r;
  const auto frame = static_cast<size_t>(std::lround(tc / kSimDt));
  if (frame >= log.frames.size()) return r;
  r.occurred = true;
  r.ids = {std::min(log.collision->id_a, log.collision->id_b),
           std::max(log.collision->id_a, log.collision->id_b)};
  for (int i = 0; i < 2; ++i) {
    const auto st = log.agent_in_frame(frame, r.ids[i]);
    if (st) r.positions[i] = se2_apply_inverse(ego_pose, st->pose.position());
  }
  r.time = tc - t0;
  r.min_distance = 0.0;
  return r;
}

struct BlockAccum {
  MatchCounts counts;
  int windows = 0;
  int gt_positive = 0;
  std::vector<std::pair<AccidentReport, AccidentReport>> tp_pairs;

  void add(const AccidentReport& pred, const AccidentReport& gt) {
    windows += 1;
    if (gt.occurred) gt_positive += 1;
    accumulate_match(counts, pred, gt);
    if (match_accident(pred, gt, kTpThreshold) == MatchOutcome::kTruePositive) {
      tp_pairs.emplace_back(pred, gt);
    }
  }

  void merge(const BlockAccum& o) {
    counts += o.counts;
    windows += o.windows;
    gt_positive += o.gt_positive;
    tp_pairs.insert(tp_pairs.end(), o.tp_pairs.begin(), o.tp_pairs.end());
  }

  AccidentBlock finish() const {
    AccidentBlock b;
    b.counts = counts;
    b.apa_value = apa(counts);
    b.windows = windows;
    b.gt_positive = gt_positive;
    b.tp = tp_metrics(tp_pairs);
    return b;
  }
};

json counts_to_json(const MatchCounts& c) {
  json j = json::object();
  for (const double d : kApaThresholds) {
    const std::string key = format_number(d);
    j[key] = {{"tp", c.tp.at(d)}, {"fp", c.fp.at(d)}, {"fn", c.fn.at(d)}};
  }
  return j;
}

MatchCounts counts_from_json(const json& j) {
  MatchCounts c;
  for (const double d : kApaThresholds) {
    const json& e = j.at(format_number(d));
    c.tp[d] = e.at("tp").get<int>();
    c.fp[d] = e.at("fp").get<int>();
    c.fn[d] = e.at("fn").get<int>();
  }
  return c;
}

json block_to_json(const AccidentBlock& b) {
  json j;
  j["apa"] = b.apa_value;
  j["windows"] = b.windows;
  j["gt_positive"] = b.gt_positive;
  j["counts"] = counts_to_json(b.counts);
  j["tp"] = {{"count", b.tp.count},
             {"id_error", b.tp.id_error_mean},
             {"position_error", b.tp.position_error_mean},
             {"time_error", b.tp.time_error_mean}};
  return j;
}

AccidentBlock block_from_json(const json& j) {
  AccidentBlock b;
  b.apa_value = j.at("apa").get<double>();
  b.windows = j.at("windows").get<int>();
  b.gt_positive = j.at("gt_positive").get<int>();
  b.counts = counts_from_json(j.at("counts"));
  b.tp.count = j.at("tp").at("count").get<int>();
  b.tp.id_error_mean = j.at("tp").at("id_error").get<double>();
  b.tp.position_error_mean = j.at("tp").at("position_error").get<double>();
  b.tp.time_error_mean = j.at("tp").at("time_error").get<double>();
  return b;
}

AgentClass nearest_agent_class(const Vec2& center_ego, const Frame& frame, const Pose2& ego_pose) {
  double best = 4.0;  // gate, meters
  AgentClass cls = AgentClass::kCar;
  for (const auto& a : frame.agents) {
    const double d = (se2_apply_inverse(ego_pose, a.pose.position()) - center_ego).norm();
    if (d < best) {
      best = d;
      cls = a.cls;
    }
  }
  return cls;
}

// Per-scenario evaluation results, merged in log order so that the report is
// independent of worker scheduling.
struct LogPartial {
  int n_windows = 0;
  bool counted = false;
  BlockAccum overall, visible, invisible;
  std::array<BlockAccum, 4> ttc_strata;  // (0,1] .. (3,4]
  double miou_sum = 0.0, vpq_sum = 0.0;
  int motion_windows = 0;
  std::vector<DetectionSample> det_samples;
};

LogPartial evaluate_one_log(const ScenarioLog& log, const EvalOptions& opts, const GridSpec& grid,
                            double horizon_s) {
  LogPartial part;
  if (log.frames.empty()) return part;
  std::vector<AgentRig> rigs = make_rigs(opts.config_name, log);
  if (rigs.empty() || rigs.front().role != RigRole::kEgo) return part;
  for (size_t r = 1; r < rigs.size(); ++r) {
    rigs[r].noise_mu = opts.noise_mu;
    rigs[r].noise_sigma = opts.noise_sigma;
    rigs[r].latency = opts.latency;
  }
  const IntersectionMap map = map_for_config(log.config);

  std::vector<VisibilityMask> vis;
  vis.reserve(rigs.size());
  for (const auto& rig : rigs) vis.push_back(compute_visibility(log, rig, map.buildings));

  const uint64_t scenario_seed = hash_combine(opts.seed, log.config.seed);
  const size_t window_span = static_cast<size_t>(opts.future_steps) * kFrameStride;

  for (size_t k0 = 2 * kFrameStride; k0 + window_span < log.frames.size(); k0 += kFrameStride) {
    part.n_windows += 1;
    const auto ego_state = log.agent_in_frame(k0, rigs.front().agent_id);
    if (!ego_state) continue;
    const Pose2 ego_pose = ego_state->pose;

    const EncodeResult gt = encode_motion(log, k0, ego_pose, grid, opts.future_steps);
    const AccidentReport gt_report = detect_accident(gt.instances);

    const uint64_t window_seed = hash_combine(scenario_seed, k0);
    const OraclePrediction pred =
        fused_oracle_predict(log, rigs, vis, k0, grid, opts.future_steps, window_seed);
    const std::vector<MotionField> variants =
        sample_field_variants(pred.field, opts.samples, hash_combine(window_seed, 0x6a6974ULL));

    std::vector<AccidentReport> sample_reports;
    InstanceMap mean_imap;
    for (size_t v = 0; v < variants.size(); ++v) {
      InstanceMap imap = decode_instances(variants[v], grid);
      imap = relabel_to_agents(imap, log, k0, ego_pose);
      sample_reports.push_back(detect_accident(imap));
      if (v == 0) mean_imap = std::move(imap);
    }
    const AccidentReport declared = declare_any(sample_reports);

    part.overall.add(declared, gt_report);
    const SampleVisibility sv = classify_sample_visibility(pred.ego_accident_occluded);
    (sv == SampleVisibility::kInvisible ? part.invisible : part.visible).add(declared, gt_report);

    // TTC table against the log-level collision label (the prediction
    // horizon caps what the pipeline can see; short horizons must miss
    // far-away collisions).
    if (log.collision) {
      const double ttc = log.collision->t - log.frames[k0].t;
      const int bucket = static_cast<int>(std::ceil(ttc - 1e-9));
      if (bucket >= 1 && bucket <= 4) {
        part.ttc_strata[bucket - 1].add(declared, log_gt_report(log, k0, horizon_s, ego_pose));
      }
    }

    part.miou_sum += miou(pred.field.seg, gt.field.seg);
    part.vpq_sum += vpq(mean_imap, gt.instances);
    part.motion_windows += 1;

    DetectionSample det;
    for (const auto& [inst_id, poly] : instances_to_polygons(mean_imap, 0)) {
      DetectionBox box;
      box.center = poly.centroid();
      double peak = 0.0;
      for (int idx = 0; idx < grid.size(); ++idx) {
        if (mean_imap.ids[0][idx] == inst_id) {
          peak = std::max(peak, static_cast<double>(pred.field.centerness[0][idx]));
        }
      }
      box.score = peak;
      box.cls = nearest_agent_class(box.center, log.frames[k0], ego_pose);
      det.preds.push_back(box);
    }
    for (const auto& a : log.frames[k0].agents) {
      const Vec2 p = se2_apply_inverse(ego_pose, a.pose.position());
      if (p.x < grid.x_min || p.x > grid.x_max || p.y < grid.y_min || p.y > grid.y_max) continue;
      det.gts.push_back({a.cls, p, 1.0});
    }
    part.det_samples.push_back(std::move(det));
  }
  part.counted = true;
  return part;
}

}  // namespace

EvalReport evaluate_logs(const std::vector<ScenarioLog>& logs, const EvalOptions& opts) {
  EvalReport report;
  report.options = opts;
  const GridSpec grid = GridSpec::motion_grid();
  const double horizon_s = opts.future_steps * kBevDt;

  // Scenarios are independent; fan out across a pool and merge in index
  // order so the report stays byte-identical across runs.
  std::vector<LogPartial> partials(logs.size());
  const unsigned hw = std::thread::hardware_concurrency();
  const size_t n_threads = std::min<size_t>(logs.size(), hw == 0 ? 1 : hw);
  if (n_threads <= 1) {
    for (size_t i = 0; i < logs.size(); ++i) {
      partials[i] = evaluate_one_log(logs[i], opts, grid, horizon_s);
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < logs.size(); i = next.fetch_add(1)) {
          partials[i] = evaluate_one_log(logs[i], opts, grid, horizon_s);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  BlockAccum overall, visible, invisible;
  std::array<BlockAccum, 4> ttc_strata;
  double miou_sum = 0.0, vpq_sum = 0.0;
  int motion_windows = 0;
  std::vector<DetectionSample> det_samples;
  for (const auto& part : partials) {
    report.n_windows += part.n_windows;
    if (part.counted) report.n_scenarios += 1;
    overall.merge(part.overall);
    visible.merge(part.visible);
    invisible.merge(part.invisible);
    for (int i = 0; i < 4; ++i) ttc_strata[i].merge(part.ttc_strata[i]);
    miou_sum += part.miou_sum;
    vpq_sum += part.vpq_sum;
    motion_windows += part.motion_windows;
    det_samples.insert(det_samples.end(), part.det_samples.begin(), part.det_samples.end());
  }

  report.overall = overall.finish();
  report.visible = visible.finish();
  report.invisible = invisible.finish();
  if (motion_windows > 0) {
    report.miou_mean = miou_sum / motion_windows;
    report.vpq_mean = vpq_sum / motion_windows;
  }
  report.detection_map_value = det_samples.empty() ? 0.0 : detection_map(det_samples);
  for (int i = 0; i < 4; ++i) {
    TtcRow row;
    row.label = "(" + std::to_string(i) + "," + std::to_string(i + 1) + "]";
    row.windows = ttc_strata[i].windows;
    row.counts = ttc_strata[i].counts;
    if (row.windows > 0) row.apa_value = apa(ttc_strata[i].counts, /*vacuous_is_perfect=*/false);
    report.ttc.push_back(row);
  }
  return report;
}

EvalReport evaluate_dataset(const std::string& dataset_dir, const EvalOptions& opts) {
  const fs::path dir(dataset_dir);
  const DatasetManifest manifest = read_manifest((dir / "manifest.json").string());
  std::vector<ScenarioLog> logs;
  for (const auto& entry : manifest.entries) {
    if (!opts.split.empty() && entry.split != opts.split) continue;
    ScenarioLog log = read_scenario_log((dir / entry.path).string());
    const IntersectionMap map = map_for_config(log.config);
    if (map_digest(map) != log.map_digest) {
      throw std::runtime_error(entry.path + ": map digest mismatch (log not generated by this map)");
    }
    logs.push_back(std::move(log));
  }
  return evaluate_logs(logs, opts);
}

void write_report(const EvalReport& report, const std::string& path) {
  json j;
  j["format"] = "crashsim-report-1";
  j["options"] = {{"config", report.options.config_name},
                  {"future_steps", report.options.future_steps},
                  {"samples", report.options.samples},
                  {"noise_mu", report.options.noise_mu},
                  {"noise_sigma", report.options.noise_sigma},
                  {"latency", report.options.latency},
                  {"split", report.options.split},
                  {"seed", report.options.seed}};
  j["counts"] = {{"scenarios", report.n_scenarios}, {"windows", report.n_windows}};
  j["motion"] = {{"miou", report.miou_mean}, {"vpq", report.vpq_mean}};
  j["detection"] = {{"map", report.detection_map_value}};
  j["accident"] = block_to_json(report.overall);
  j["accident_visible"] = block_to_json(report.visible);
  j["accident_invisible"] = block_to_json(report.invisible);
  json ttc = json::array();
  for (const auto& row : report.ttc) {
    json jr;
    jr["stratum"] = row.label;
    jr["windows"] = row.windows;
    if (row.apa_value) {
      jr["apa"] = *row.apa_value;
    } else {
      jr["apa"] = nullptr;
    }
    jr["counts"] = counts_to_json(row.counts);
    ttc.push_back(jr);
  }
  j["ttc"] = ttc;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << '\n';
}

EvalReport read_report(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": malformed report (" + e.what() + ")");
  }
  if (!j.contains("format") || j["format"] != "crashsim-report-1") {
    throw std::runtime_error(path + ": not a metrics report");
  }
  EvalReport r;
  const json& o = j.at("options");
  r.options.config_name = o.at("config").get<std::string>();
  r.options.future_steps = o.at("future_steps").get<int>();
  r.options.samples = o.at("samples").get<int>();
  r.options.noise_mu = o.at("noise_mu").get<double>();
  r.options.noise_sigma = o.at("noise_sigma").get<double>();
  r.options.latency = o.at("latency").get<double>();
  r.options.split = o.at("split").get<std::string>();
  r.options.seed = o.at("seed").get<uint64_t>();
  r.n_scenarios = j.at("counts").at("scenarios").get<int>();
  r.n_windows = j.at("counts").at("windows").get<int>();
  r.miou_mean = j.at("motion").at("miou").get<double>();
  r.vpq_mean = j.at("motion").at("vpq").get<double>();
  r.detection_map_value = j.at("detection").at("map").get<double>();
  r.overall = block_from_json(j.at("accident"));
  r.visible = block_from_json(j.at("accident_visible"));
  r.invisible = block_from_json(j.at("accident_invisible"));
  for (const auto& jr : j.at("ttc")) {
    TtcRow row;
    row.label = jr.at("stratum").get<std::string>();
    row.windows = jr.at("windows").get<int>();
    if (!jr.at("apa").is_null()) row.apa_value = jr.at("apa").get<double>();
    row.counts = counts_from_json(jr.at("counts"));
    r.ttc.push_back(row);
  }
  return r;
}

std::string render_report_table(const std::vector<EvalReport>& reports) {
  std::ostringstream md;
  md << "| Config | Horizon (s) | Noise mu (m) | Latency (s) | mIOU | VPQ | APA | id err | "
        "pos err (m) | time err (s) | mAP | Windows |\n";
  md << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    md << "| " << r.options.config_name << " | " << format_number(r.options.future_steps * kBevDt)
       << " | " << format_number(r.options.noise_mu) << " | "
       << format_number(r.options.latency) << " | " << format_number(r.miou_mean) << " | "
       << format_number(r.vpq_mean) << " | " << format_number(r.overall.apa_value) << " | "
       << format_number(r.overall.tp.id_error_mean) << " | "
       << format_number(r.overall.tp.position_error_mean) << " | "
       << format_number(r.overall.tp.time_error_mean) << " | "
       << format_number(r.detection_map_value) << " | " << r.n_windows << " |\n";
  }
  return md.str();
}

}  // namespace crashsim
