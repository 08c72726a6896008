#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crashsim/pipeline.hpp"

namespace fs = std::filesystem;
using namespace crashsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitDataError = 3;

std::vector<ScenarioType> parse_types(const std::string& list) {
  std::vector<ScenarioType> types;
  if (list.empty() || list == "all") return types;
  std::string token;
  std::istringstream ss(list);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) types.push_back(scenario_type_from_name(token));
  }
  return types;
}

std::string dataset_or_default(const std::string& dataset) {
  if (!dataset.empty()) return dataset;
  if (const char* env = std::getenv("CRASHSIM_DATASET_ROOT")) return env;
  throw CLI::ValidationError("--dataset", "no dataset given and CRASHSIM_DATASET_ROOT unset");
}

int horizon_steps(const std::string& horizon) {
  if (horizon == "2s") return 4;
  if (horizon == "3s") return 6;
  if (horizon == "4s") return 8;
  throw CLI::ValidationError("--horizon", "must be one of 2s, 3s, 4s");
}

int cmd_generate(const std::string& out_dir, int n, const std::string& types, uint64_t seed) {
  GenerateOptions opts;
  opts.out_dir = out_dir;
  opts.n_scenarios = n;
  opts.types = parse_types(types);
  opts.seed = seed;
  const GenerateSummary summary = generate_dataset(opts);

  std::cout << "generated " << n << " scenarios in " << out_dir << "\n";
  for (const auto& [type, count] : summary.per_type) {
    std::cout << "  " << scenario_type_name(type) << ": " << count << "\n";
  }
  if (summary.n_accident > 0) {
    std::cout << "collision rate (accident scenarios): "
              << format_number(static_cast<double>(summary.n_collided) / summary.n_accident)
              << " (" << summary.n_collided << "/" << summary.n_accident << ")\n";
  }
  int train = 0, val = 0, test = 0;
  for (const auto& e : summary.manifest.entries) {
    if (e.split == "train") ++train;
    else if (e.split == "val") ++val;
    else ++test;
  }
  std::cout << "splits: train " << train << " / val " << val << " / test " << test << "\n";
  return kExitOk;
}

EvalOptions make_eval_options(const std::string& config, const std::string& horizon, int samples,
                              double noise, double noise_sigma, double latency,
                              const std::string& split, uint64_t seed) {
  EvalOptions opts;
  opts.config_name = config;
  opts.future_steps = horizon_steps(horizon);
  opts.samples = samples;
  opts.noise_mu = noise;
  opts.noise_sigma = noise_sigma;
  opts.latency = latency;
  opts.split = split == "all" ? "" : split;
  opts.seed = seed;
  return opts;
}

void print_report_summary(const EvalReport& r) {
  std::cout << "config " << r.options.config_name << ": scenarios " << r.n_scenarios
            << ", windows " << r.n_windows << "\n";
  std::cout << "  mIOU " << format_number(r.miou_mean) << ", VPQ " << format_number(r.vpq_mean)
            << ", APA " << format_number(r.overall.apa_value) << ", mAP "
            << format_number(r.detection_map_value) << "\n";
  std::cout << "  TP errors (d=10m, n=" << r.overall.tp.count
            << "): id " << format_number(r.overall.tp.id_error_mean) << ", pos "
            << format_number(r.overall.tp.position_error_mean) << " m, time "
            << format_number(r.overall.tp.time_error_mean) << " s\n";
  std::cout << "  TTC strata APA:";
  for (const auto& row : r.ttc) {
    std::cout << " " << row.label << "="
              << (row.apa_value ? format_number(*row.apa_value) : std::string("none"));
  }
  std::cout << "\n";
}

int cmd_evaluate(const std::string& dataset, const EvalOptions& opts, const std::string& out) {
  const EvalReport report = evaluate_dataset(dataset_or_default(dataset), opts);
  if (!out.empty()) write_report(report, out);
  print_report_summary(report);
  return kExitOk;
}

int cmd_sweep(const std::string& dataset, const std::string& param,
              const std::vector<double>& values, const std::vector<std::string>& configs,
              EvalOptions base, const std::string& out_prefix) {
  if (param != "noise" && param != "latency") {
    throw CLI::ValidationError("--param", "must be noise or latency");
  }
  const std::string root = dataset_or_default(dataset);

  std::vector<std::vector<std::string>> rows;
  std::vector<PlotSeries> series;
  for (const auto& config : configs) {
    PlotSeries s;
    s.name = config;
    for (const double v : values) {
      EvalOptions opts = base;
      opts.config_name = config;
      if (param == "noise") {
        opts.noise_mu = v;
        if (opts.noise_sigma == 0.0 && v > 0.0) opts.noise_sigma = 0.02;
      } else {
        opts.latency = v;
      }
      const EvalReport r = evaluate_dataset(root, opts);
      rows.push_back({param, format_number(v), config, format_number(r.overall.apa_value),
                      format_number(r.miou_mean), format_number(r.vpq_mean),
                      format_number(r.detection_map_value), std::to_string(r.n_windows)});
      s.points.emplace_back(v, r.overall.apa_value);
      std::cout << config << " " << param << "=" << format_number(v) << " APA "
                << format_number(r.overall.apa_value) << "\n";
    }
    series.push_back(std::move(s));
  }
  write_csv(out_prefix + ".csv", {"param", "value", "config", "apa", "miou", "vpq", "map",
                                  "windows"},
            rows);
  write_line_plot(out_prefix + ".svg", "APA vs " + param,
                  param == "noise" ? "pose noise mean (m)" : "latency (s)", "APA", series);
  std::cout << "wrote " << out_prefix << ".csv and " << out_prefix << ".svg\n";
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<EvalReport> reports;
  for (const auto& path : inputs) reports.push_back(read_report(path));
  const std::string table = render_report_table(reports);
  if (!out.empty()) {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + out);
    os << table;
  }
  std::cout << table;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crashsim: deterministic accident-scenario generation and evaluation"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a scenario dataset");
  std::string gen_out;
  int gen_n = 100;
  std::string gen_types = "all";
  uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--scenarios", gen_n, "number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--types", gen_types, "comma-separated scenario type names, or 'all'");
  gen->add_option("--seed", gen_seed, "base seed");

  // shared evaluation options
  std::string dataset, config = "single", horizon = "2s", split = "test", eval_out;
  int samples = 5;
  double noise = 0.0, noise_sigma = 0.02, latency = 0.0;
  uint64_t eval_seed = 0;

  auto* eval = app.add_subcommand("evaluate", "evaluate one V2X configuration");
  eval->add_option("--dataset", dataset, "dataset directory (default: $CRASHSIM_DATASET_ROOT)");
  eval->add_option("--config", config, "V2X configuration name");
  eval->add_option("--horizon", horizon, "prediction horizon: 2s, 3s or 4s");
  eval->add_option("--samples", samples, "extra sampled fields (0 = mean field only)")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--noise", noise, "pose-noise mean (m), non-ego rigs");
  eval->add_option("--noise-sigma", noise_sigma, "pose-noise stddev (m)");
  eval->add_option("--latency", latency, "communication latency (s), non-ego rigs");
  eval->add_option("--split", split, "dataset split: train, val, test or all");
  eval->add_option("--seed", eval_seed, "degradation/jitter seed");
  eval->add_option("--out", eval_out, "report JSON output path");

  auto* sweep = app.add_subcommand("sweep", "sweep a degradation parameter");
  std::string sweep_dataset, sweep_param = "noise", sweep_horizon = "2s", sweep_split = "test";
  std::string sweep_out = "sweep";
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_configs;
  int sweep_samples = 5;
  uint64_t sweep_seed = 0;
  sweep->add_option("--dataset", sweep_dataset,
                    "dataset directory (default: $CRASHSIM_DATASET_ROOT)");
  sweep->add_option("--param", sweep_param, "noise or latency");
  sweep->add_option("--values", sweep_values, "parameter values")->required()->expected(-1);
  sweep->add_option("--configs", sweep_configs, "V2X configuration names")->expected(-1);
  sweep->add_option("--horizon", sweep_horizon, "prediction horizon: 2s, 3s or 4s");
  sweep->add_option("--samples", sweep_samples, "extra sampled fields");
  sweep->add_option("--split", sweep_split, "dataset split");
  sweep->add_option("--seed", sweep_seed, "degradation/jitter seed");
  sweep->add_option("--out", sweep_out, "output path prefix (.csv/.svg appended)");

  auto* rep = app.add_subcommand("report", "render a markdown comparison table");
  std::vector<std::string> rep_inputs;
  std::string rep_out;
  rep->add_option("--inputs", rep_inputs, "report JSON files")->required()->expected(-1);
  rep->add_option("--out", rep_out, "markdown output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadArgs;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_out, gen_n, gen_types, gen_seed);
    if (eval->parsed()) {
      return cmd_evaluate(dataset,
                          make_eval_options(config, horizon, samples, noise, noise_sigma, latency,
                                            split, eval_seed),
                          eval_out);
    }
    if (sweep->parsed()) {
      if (sweep_configs.empty()) sweep_configs = all_config_names();
      EvalOptions base = make_eval_options("single", sweep_horizon, sweep_samples, 0.0, 0.0, 0.0,
                                           sweep_split, sweep_seed);
      return cmd_sweep(sweep_dataset, sweep_param, sweep_values, sweep_configs, base, sweep_out);
    }
    if (rep->parsed()) return cmd_report(rep_inputs, rep_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}
