// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

// turnpoint: batch command line over the library.
//
// Exit codes: 0 success, 2 input or configuration error, 3 no turning point,
// 4 network error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "turnpoint/aggregate.hpp"
#include "turnpoint/curve.hpp"
#include "turnpoint/error.hpp"
#include "turnpoint/grid.hpp"
#include "turnpoint/io.hpp"
#include "turnpoint/records.hpp"
#include "turnpoint/sim.hpp"
#include "turnpoint/taskdist.hpp"
#include "turnpoint/turn.hpp"
#ifdef TURNPOINT_HAVE_FETCH
#include "turnpoint/fetch.hpp"
#endif

namespace fs = std::filesystem;
using namespace turnpoint;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNoTurningPoint = 3;
constexpr int kExitNetwork = 4;

struct Global {
  std::uint64_t seed = 0;
  TemperatureGrid grid{};
  std::size_t top_k = 1000;
  std::string out_dir = ".";
  unsigned workers = 0;
  bool strict = false;
};

void emit(const Global& g, const std::string& name, const std::string& content) {
  const fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  io::write_file_atomic(dir / name, content);
}

std::vector<double> grid_points(const Global& g) {
  g.grid.validate();
  return g.grid.points();
}

RecordSet load_records(const std::string& path, bool strict, ojson& meta) {
  auto report = read_records(path, strict);
  ojson rejected = ojson::array();
  for (const auto& r : report.rejected) {
    ojson e;
    e["line"] = r.line;
    e["code"] = std::string(to_string(r.code));
    e["message"] = r.message;
    rejected.push_back(e);
    std::cerr << path << ":" << r.line << ": " << to_string(r.code) << ": " << r.message << "\n";
  }
  meta["input"] = path;
  meta["records"] = report.records.size();
  meta["rejected"] = rejected;
  return std::move(report.records);
}

ojson grid_json(const TemperatureGrid& grid) {
  ojson j;
  j["start"] = grid.start;
  j["step"] = grid.step;
  j["max"] = grid.max;
  return j;
}

ojson base_meta(const Global& g, const std::string& command) {
  ojson m;
  m["command"] = command;
  m["seed"] = g.seed;
  m["grid"] = grid_json(g.grid);
  m["top_k"] = g.top_k;
  return m;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

// --------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string config_path;
  std::vector<double> alphas;
  std::optional<std::size_t> trials, steps, n_proper, n_improper;
  std::optional<double> proper_mean, proper_sigma, improper_logit;
  bool literal_proper_softmax = false;
  bool export_records = false;
  std::size_t export_count = 8;
  std::size_t export_steps = 32;
  std::size_t export_depth = 1000;
  std::size_t synth_samples = 0;
  std::size_t synth_problems = 1;
  std::size_t synth_steps = 16;
};

int cmd_simulate(const Global& g, const SimulateArgs& a, bool seed_given, bool grid_given) {
  sim::SimConfig c;
  if (!a.config_path.empty()) c = sim::sim_config_from_json(io::read_file(a.config_path));
  if (seed_given || a.config_path.empty()) c.seed = g.seed;
  if (grid_given || a.config_path.empty()) c.grid = g.grid;
  if (a.trials) c.trials = *a.trials;
  if (a.steps) c.steps = *a.steps;
  if (a.n_proper) c.n_proper = *a.n_proper;
  if (a.n_improper) c.n_improper = *a.n_improper;
  if (a.proper_mean) c.proper_logit_mean = *a.proper_mean;
  if (a.proper_sigma) c.proper_logit_sigma = *a.proper_sigma;
  if (a.improper_logit) c.improper_logit = *a.improper_logit;
  if (a.literal_proper_softmax) c.literal_proper_softmax = true;
  c.workers = g.workers;

  std::vector<double> alphas = a.alphas;
  if (alphas.empty()) alphas.push_back(c.alpha);
  std::vector<std::string> warnings;
  for (const double alpha : alphas) {
    auto ci = c;
    ci.alpha = alpha;
    for (auto& w : ci.validate()) warnings.push_back(std::move(w));
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  ojson meta;
  meta["command"] = "simulate";
  meta["seed"] = c.seed;
  meta["alphas"] = alphas;
  meta["config"] = ojson::parse(sim::sim_config_to_json(c));
  ojson files = ojson::array();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    auto ci = c;
    ci.alpha = alphas[i];
    const auto curves = sim::simulate_curves(ci);
    const auto csv = sim::sim_curves_to_csv(curves);
    if (i == 0) {
      emit(g, "sim_curve.csv", csv);
      files.push_back("sim_curve.csv");
    }
    if (alphas.size() > 1) {
      const auto name = "sim_curve_alpha_" + io::format_double(alphas[i]) + ".csv";
      emit(g, name, csv);
      files.push_back(name);
    }
  }
  c.alpha = alphas.front();
  const auto points = c.grid.points();
  if (a.export_records) {
    sim::ExportOptions opt;
    opt.records = a.export_count;
    opt.steps = a.export_steps;
    opt.depth = a.export_depth;
    RecordSet all;
    for (std::size_t gi = 0; gi < points.size(); ++gi) {
      auto part = sim::export_records(c, points[gi], gi, opt);
      for (auto& r : part) all.push_back(std::move(r));
    }
    emit(g, "sim_records.jsonl", records_to_jsonl(all));
    files.push_back("sim_records.jsonl");
  }
  if (a.synth_samples > 0) {
    RecordSet all;
    for (const double t : points) {
      for (std::size_t p = 0; p < a.synth_problems; ++p) {
        auto part = sim::synth_task_samples(c, t, a.synth_samples, a.synth_steps, c.seed, p);
        for (auto& r : part) all.push_back(std::move(r));
      }
    }
    emit(g, "synth_samples.jsonl", records_to_jsonl(all));
    files.push_back("synth_samples.jsonl");
  }
  meta["files"] = files;
  meta["warnings"] = warnings;
  emit(g, "sim_meta.json", dump(meta));
  return kExitOk;
}

// --------------------------------------------------------------------------
// curve / select

struct CurveArgs {
  std::string records;
  std::string mode = "trajectory";
  std::string weighting = "per-sequence";
  bool renormalize = false;
};

struct SelectArgs {
  std::string aggregation = "majority";
  std::size_t smoothing_window = 1;
  std::size_t retry_window = 3;
  double zero_tol = 1e-6;
  std::optional<double> t_max;
};

CurveEstimate build_curve(const Global& g, const CurveArgs& a, ojson& meta) {
  const auto grid = grid_points(g);
  const auto records = load_records(a.records, g.strict, meta);
  CurveOptions opt;
  opt.entropy.top_k = g.top_k;
  opt.entropy.renormalize = a.renormalize;
  opt.workers = g.workers;
  if (a.weighting == "per-sequence") {
    opt.weighting = CurveWeighting::PerSequence;
  } else if (a.weighting == "per-token") {
    opt.weighting = CurveWeighting::PerToken;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown weighting '" + a.weighting + "'");
  }
  CurveEstimate est;
  if (a.mode == "trajectory") {
    est = estimate_curve(records, grid, opt);
  } else if (a.mode == "counterfactual") {
    est = counterfactual_curve(records, grid, opt);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown mode '" + a.mode + "'");
  }
  meta["mode"] = a.mode;
  meta["weighting"] = a.weighting;
  meta["renormalize"] = a.renormalize;
  meta["records_used"] = est.diagnostics.records_used;
  meta["skipped_without_steps"] = est.diagnostics.skipped_without_steps;
  meta["off_grid"] = est.diagnostics.off_grid;
  meta["warnings"] = est.diagnostics.warnings;
  // Fetched records carry their server depth; shallow depths underestimate entropy.
  std::set<std::string> depths;
  for (const auto& r : records) {
    const auto it = r.meta.find("logprob_depth");
    if (it != r.meta.end()) depths.insert(it->second);
  }
  meta["logprob_depth"] = std::vector<std::string>(depths.begin(), depths.end());
  for (const auto& w : est.diagnostics.warnings) std::cerr << "warning: " << w << "\n";
  return est;
}

int cmd_curve(const Global& g, const CurveArgs& a) {
  auto meta = base_meta(g, "curve");
  const auto est = build_curve(g, a, meta);
  emit(g, "curve.csv", curve_to_csv(est.curve));
  emit(g, "curve_meta.json", dump(meta));
  return kExitOk;
}

int cmd_select(const Global& g, const CurveArgs& a, const SelectArgs& s) {
  auto meta = base_meta(g, "select");
  const auto est = build_curve(g, a, meta);
  emit(g, "curve.csv", curve_to_csv(est.curve));
  SelectOptions opt;
  opt.smoothing_window = s.smoothing_window;
  opt.retry_window = s.retry_window;
  opt.zero_tol = s.zero_tol;
  opt.t_max = s.t_max;
  const auto aggregation = parse_aggregation(s.aggregation);
  meta["aggregation"] = std::string(to_string(aggregation));
  try {
    const auto result = select_temperature(est.curve, aggregation, opt);
    emit(g, "turn_result.json", turn_result_to_json(result));
    emit(g, "select_meta.json", dump(meta));
    return kExitOk;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoTurningPoint) throw;
    ojson d = meta;
    d["error"] = std::string(to_string(e.code()));
    d["message"] = e.what();
    const Eigen::ArrayXd d2 = log_second_differences(est.curve, s.smoothing_window);
    const Eigen::ArrayXd logh = log_curve(est.curve, s.smoothing_window);
    d["second_differences"] = std::vector<double>(d2.data(), d2.data() + d2.size());
    d["log_entropy"] = std::vector<double>(logh.data(), logh.data() + logh.size());
    emit(g, "turn_diagnostics.json", dump(d));
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoTurningPoint;
  }
}

// --------------------------------------------------------------------------
// heatmap / evaluate

struct HeatmapArgs {
  std::string samples;
  std::string aggregation = "majority";
  std::vector<std::size_t> sample_sizes;
  std::size_t resamples = 100;
  bool use_scores = false;
  std::string normalizer = "default";
};

struct EvaluateArgs {
  std::optional<double> predicted;
  std::string turn_result;
  double epsilon = 0.02;
};

Normalizer pick_normalizer(const std::string& name) {
  if (name == "default") return default_normalize;
  if (name == "identity") return identity_normalize;
  throw Error(ErrorCode::InvalidArgument, "unknown normalizer '" + name + "'");
}

AccuracyHeatmap build_heatmap(const Global& g, const HeatmapArgs& a, std::vector<std::size_t> sizes, ojson& meta) {
  const auto records = load_records(a.samples, g.strict, meta);
  const auto sets = group_samples(records, pick_normalizer(a.normalizer));
  HeatmapOptions opt;
  opt.aggregation = parse_aggregation(a.aggregation);
  opt.resamples = a.resamples;
  opt.seed = g.seed;
  opt.use_scores = a.use_scores;
  opt.workers = g.workers;
  meta["aggregation"] = std::string(to_string(opt.aggregation));
  meta["resamples"] = a.resamples;
  meta["use_scores"] = a.use_scores;
  meta["normalizer"] = a.normalizer;
  return accuracy_heatmap(sets, sizes, opt);
}

int cmd_heatmap(const Global& g, const HeatmapArgs& a) {
  auto meta = base_meta(g, "heatmap");
  auto sizes = a.sample_sizes;
  if (sizes.empty()) sizes = {1, 2, 4, 8, 16, 32, 64, 128};
  const auto h = build_heatmap(g, a, sizes, meta);
  emit(g, "heatmap.csv", heatmap_to_csv(h));
  emit(g, "heatmap_meta.json", dump(meta));
  return kExitOk;
}

int cmd_evaluate(const Global& g, const HeatmapArgs& a, const EvaluateArgs& e) {
  auto meta = base_meta(g, "evaluate");
  double predicted = 0.0;
  if (e.predicted) {
    predicted = *e.predicted;
  } else if (!e.turn_result.empty()) {
    try {
      predicted = ojson::parse(io::read_file(e.turn_result)).at("predicted_temperature").get<double>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ParseError, e.turn_result + ": " + ex.what());
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "evaluate needs --predicted or --turn-result");
  }
  auto sizes = a.sample_sizes;
  if (sizes.empty()) sizes = {128};
  const auto h = build_heatmap(g, a, sizes, meta);
  const auto row = h.row(h.sample_sizes.back());
  const auto range = eps_optimal_range(row, e.epsilon);
  const auto score = evaluate_prediction(predicted, range, row);
  meta["predicted_temperature"] = predicted;
  meta["sample_size"] = h.sample_sizes.back();
  emit(g, "heatmap.csv", heatmap_to_csv(h));
  emit(g, "eps_range.json", eps_range_to_json(range));
  emit(g, "prediction_score.json", prediction_score_to_json(score));
  emit(g, "evaluate_meta.json", dump(meta));
  return kExitOk;
}

// --------------------------------------------------------------------------
// calibrate-beta / distance

int cmd_calibrate_beta(const Global& g, const std::string& input) {
  const auto rows = io::parse_csv(io::read_file(input));
  if (rows.empty() || rows.front() != std::vector<std::string>{"label", "a", "b"})
    throw Error(ErrorCode::ParseError, input + ": expected header label,a,b");
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3)
      throw Error(ErrorCode::PairedInputMismatch, input + ": row " + std::to_string(i + 1) + " needs 3 fields");
    a.push_back(io::parse_double(rows[i][1]));
    b.push_back(io::parse_double(rows[i][2]));
  }
  emit(g, "beta.json", beta_calibration_to_json(calibrate_beta(a, b)));
  return kExitOk;
}

int cmd_distance(const Global& g, const std::string& records_path, const std::string& correlation_path,
                 bool renormalize) {
  if (records_path.empty() && correlation_path.empty())
    throw Error(ErrorCode::InvalidArgument, "distance needs --records or --correlation");
  if (!records_path.empty()) {
    ojson meta;
    const auto records = load_records(records_path, g.strict, meta);
    DistanceOptions opt;
    opt.entropy.top_k = g.top_k;
    opt.entropy.renormalize = renormalize;
    opt.workers = g.workers;
    const auto report = model_task_distance(records, opt);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    emit(g, "distance.json", distance_report_to_json(report));
  }
  if (!correlation_path.empty()) {
    const auto rows = parse_correlation_csv(io::read_file(correlation_path));
    std::vector<double> d;
    std::vector<double> m;
    ojson labels = ojson::array();
    for (const auto& r : rows) {
      d.push_back(r.distance);
      m.push_back(r.midpoint);
      labels.push_back(r.model_label);
    }
    ojson j;
    j["r"] = pearson_correlation(d, m);
    j["n"] = rows.size();
    j["models"] = labels;
    emit(g, "correlation.json", dump(j));
  }
  return kExitOk;
}

// --------------------------------------------------------------------------
// fetch

#ifdef TURNPOINT_HAVE_FETCH
struct FetchArgs {
  std::string prompts;
  std::string endpoint;
  std::string model;
  std::vector<double> temperatures;
  std::size_t n = 1;
  std::size_t max_tokens = 1024;
  std::optional<std::size_t> sample_top_k;
  std::optional<double> top_p;
  std::size_t logprob_depth = 20;
  double timeout = 120.0;
  unsigned max_in_flight = 4;
  unsigned tries = 5;
  double backoff = 1.0;
  bool base_logprobs = false;
};

int cmd_fetch(const Global& g, const FetchArgs& a) {
  EndpointConfig ep;
  ep.base_url = a.endpoint;
  if (ep.base_url.empty()) {
    if (const char* env = std::getenv("TURNPOINT_ENDPOINT")) ep.base_url = env;
  }
  if (ep.base_url.empty()) throw Error(ErrorCode::InvalidConfig, "no endpoint (--endpoint or TURNPOINT_ENDPOINT)");
  ep.model = a.model;
  ep.timeout_seconds = a.timeout;
  ep.max_in_flight = a.max_in_flight;
  ep.max_tries = a.tries;
  ep.backoff_base_seconds = a.backoff;
  ep.server_reports_base_logprobs = a.base_logprobs;
  SamplingParams p;
  p.max_tokens = a.max_tokens;
  p.top_k = a.sample_top_k;
  p.top_p = a.top_p;
  p.n_per_temperature = a.n;
  p.temperatures = a.temperatures.empty() ? grid_points(g) : a.temperatures;
  p.logprob_depth = a.logprob_depth;
  const auto prompts = parse_prompts(io::read_file(a.prompts));
  const auto result = fetch_samples(ep, prompts, p);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  emit(g, "samples.jsonl", records_to_jsonl(result.records));
  auto meta = base_meta(g, "fetch");
  meta["model"] = ep.model;
  meta["temperatures"] = p.temperatures;
  meta["n_per_temperature"] = p.n_per_temperature;
  meta["logprob_depth"] = p.logprob_depth;
  meta["requests"] = result.requests;
  meta["records"] = result.records.size();
  meta["warnings"] = result.warnings;
  emit(g, "fetch_meta.json", dump(meta));
  return kExitOk;
}
#endif

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoTurningPoint: return kExitNoTurningPoint;
    case ErrorCode::FetchFailed: return kExitNetwork;
    default: return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-based sampling temperature selection"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  auto* grid_start = app.add_option("--grid-start", g.grid.start, "First grid temperature")->capture_default_str();
  auto* grid_step = app.add_option("--grid-step", g.grid.step, "Grid spacing")->capture_default_str();
  auto* grid_max = app.add_option("--grid-max", g.grid.max, "Last grid temperature")->capture_default_str();
  app.add_option("--top-k", g.top_k, "Entries kept per step for entropy")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_flag("--strict", g.strict, "Fail on the first bad input line");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the error-propagation simulator");
  sim_cmd->add_option("--config", sim_args.config_path, "SimConfig JSON file");
  sim_cmd->add_option("--alpha", sim_args.alphas, "Noise tolerance (repeatable)");
  sim_cmd->add_option("--trials", sim_args.trials);
  sim_cmd->add_option("--steps", sim_args.steps);
  sim_cmd->add_option("--n-proper", sim_args.n_proper);
  sim_cmd->add_option("--n-improper", sim_args.n_improper);
  sim_cmd->add_option("--proper-mean", sim_args.proper_mean);
  sim_cmd->add_option("--proper-sigma", sim_args.proper_sigma);
  sim_cmd->add_option("--improper-logit", sim_args.improper_logit);
  sim_cmd->add_flag("--literal-proper-softmax", sim_args.literal_proper_softmax);
  sim_cmd->add_flag("--export-records", sim_args.export_records, "Write sim_records.jsonl");
  sim_cmd->add_option("--export-count", sim_args.export_count, "Records per temperature")->capture_default_str();
  sim_cmd->add_option("--export-steps", sim_args.export_steps)->capture_default_str();
  sim_cmd->add_option("--export-depth", sim_args.export_depth, "Entries per step (0 = all)")->capture_default_str();
  sim_cmd->add_option("--synth-samples", sim_args.synth_samples, "Write synth_samples.jsonl with N samples");
  sim_cmd->add_option("--synth-problems", sim_args.synth_problems)->capture_default_str();
  sim_cmd->add_option("--synth-steps", sim_args.synth_steps)->capture_default_str();

  CurveArgs curve_args;
  SelectArgs select_args;
  const auto add_curve_opts = [&](CLI::App* cmd) {
    cmd->add_option("--records", curve_args.records, "Record JSONL file")->required();
    cmd->add_option("--mode", curve_args.mode, "trajectory | counterfactual")->capture_default_str();
    cmd->add_option("--weighting", curve_args.weighting, "per-sequence | per-token")->capture_default_str();
    cmd->add_flag("--renormalize", curve_args.renormalize, "Renormalize over the kept top-k entries");
  };
  auto* curve_cmd = app.add_subcommand("curve", "Estimate the entropy-temperature curve");
  add_curve_opts(curve_cmd);
  auto* select_cmd = app.add_subcommand("select", "Pick a sampling temperature");
  add_curve_opts(select_cmd);
  select_cmd->add_option("--aggregation", select_args.aggregation, "majority | best-of-n")->capture_default_str();
  select_cmd->add_option("--smoothing-window", select_args.smoothing_window)->capture_default_str();
  select_cmd->add_option("--retry-window", select_args.retry_window, "0 disables the retry")->capture_default_str();
  select_cmd->add_option("--zero-tol", select_args.zero_tol)->capture_default_str();
  select_cmd->add_option("--t-max", select_args.t_max, "Upper clamp for the prediction");

  HeatmapArgs heat_args;
  EvaluateArgs eval_args;
  const auto add_heat_opts = [&](CLI::App* cmd) {
    cmd->add_option("--samples", heat_args.samples, "Sample JSONL file")->required();
    cmd->add_option("--aggregation", heat_args.aggregation, "majority | best-of-n")->capture_default_str();
    cmd->add_option("--sample-size", heat_args.sample_sizes, "Sample size (repeatable)");
    cmd->add_option("--resamples", heat_args.resamples)->capture_default_str();
    cmd->add_flag("--use-scores", heat_args.use_scores, "Best-of-N by score instead of pass@K");
    cmd->add_option("--normalizer", heat_args.normalizer, "default | identity")->capture_default_str();
  };
  auto* heat_cmd = app.add_subcommand("heatmap", "Accuracy over temperature and sample size");
  add_heat_opts(heat_cmd);
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a predicted temperature");
  add_heat_opts(eval_cmd);
  eval_cmd->add_option("--predicted", eval_args.predicted, "Predicted temperature");
  eval_cmd->add_option("--turn-result", eval_args.turn_result, "turn_result.json to read the prediction from");
  eval_cmd->add_option("--epsilon", eval_args.epsilon)->capture_default_str();

  std::string beta_input;
  auto* beta_cmd = app.add_subcommand("calibrate-beta", "Offset between two midpoint columns");
  beta_cmd->add_option("--input", beta_input, "CSV with header label,a,b")->required();

  std::string dist_records;
  std::string dist_correlation;
  bool dist_renormalize = false;
  auto* dist_cmd = app.add_subcommand("distance", "Model-task distance and its correlation");
  dist_cmd->add_option("--records", dist_records, "Records generated at one temperature");
  dist_cmd->add_option("--correlation", dist_correlation, "CSV with header model_label,distance,midpoint");
  dist_cmd->add_flag("--renormalize", dist_renormalize);

#ifdef TURNPOINT_HAVE_FETCH
  FetchArgs fetch_args;
  auto* fetch_cmd = app.add_subcommand("fetch", "Sample completions with logprobs from an endpoint");
  fetch_cmd->add_option("--prompts", fetch_args.prompts, "JSONL with problem_id and prompt")->required();
  fetch_cmd->add_option("--endpoint", fetch_args.endpoint, "Base URL (else TURNPOINT_ENDPOINT)");
  fetch_cmd->add_option("--model", fetch_args.model)->required();
  fetch_cmd->add_option("--temperature", fetch_args.temperatures, "Temperature (repeatable; default: the grid)");
  fetch_cmd->add_option("-n,--n", fetch_args.n, "Completions per temperature")->capture_default_str();
  fetch_cmd->add_option("--max-tokens", fetch_args.max_tokens)->capture_default_str();
  fetch_cmd->add_option("--sample-top-k", fetch_args.sample_top_k, "Server-side top-k sampling");
  fetch_cmd->add_option("--top-p", fetch_args.top_p);
  fetch_cmd->add_option("--logprob-depth", fetch_args.logprob_depth)->capture_default_str();
  fetch_cmd->add_option("--timeout", fetch_args.timeout, "Seconds per request")->capture_default_str();
  fetch_cmd->add_option("--max-in-flight", fetch_args.max_in_flight)->capture_default_str();
  fetch_cmd->add_option("--tries", fetch_args.tries)->capture_default_str();
  fetch_cmd->add_option("--backoff", fetch_args.backoff, "First retry delay in seconds")->capture_default_str();
  fetch_cmd->add_flag("--base-logprobs", fetch_args.base_logprobs, "Server reports untempered logprobs");
#endif

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*sim_cmd) {
      const bool grid_given = grid_start->count() + grid_step->count() + grid_max->count() > 0;
      return cmd_simulate(g, sim_args, app.get_option("--seed")->count() > 0, grid_given);
    }
    if (*curve_cmd) return cmd_curve(g, curve_args);
    if (*select_cmd) return cmd_select(g, curve_args, select_args);
    if (*heat_cmd) return cmd_heatmap(g, heat_args);
    if (*eval_cmd) return cmd_evaluate(g, heat_args, eval_args);
    if (*beta_cmd) return cmd_calibrate_beta(g, beta_input);
    if (*dist_cmd) return cmd_distance(g, dist_records, dist_correlation, dist_renormalize);
#ifdef TURNPOINT_HAVE_FETCH
    if (*fetch_cmd) return cmd_fetch(g, fetch_args);
#endif
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
