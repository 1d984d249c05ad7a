// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "turnpoint/dist.hpp"
#include "turnpoint/error.hpp"
#include "turnpoint/io.hpp"
#include "turnpoint/parallel.hpp"

namespace turnpoint::sim {

namespace {

void require_positive_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidTemperature, "temperature must be > 0, got " + std::to_string(t));
  }
}

// Normalized proper-block distribution at T and its entropy.
struct ProperBlock {
  Eigen::ArrayXd q;
  double entropy = 0.0;
};

ProperBlock proper_block(const Eigen::ArrayXd& proper_logits, const SimConfig& config, double temperature) {
  ProperBlock b;
  b.q = softmax_scaled(proper_logits, config.literal_proper_softmax ? 1.0 : temperature);
  b.entropy = entropy_nats(b.q);
  return b;
}

// -sum over both blocks of p ln p when the proper block carries 1 - x.
double block_entropy(double x, const ProperBlock& block, double log_n_improper) {
  const double keep = 1.0 - x;
  double h = 0.0;
  if (keep > kProbabilityFloor) h += keep * block.entropy - keep * std::log(keep);
  if (x > kProbabilityFloor) h += x * (log_n_improper - std::log(x));
  return h;
}

std::string index_name(char prefix, std::size_t i) { return prefix + std::to_string(i); }

}  // namespace

std::vector<std::string> SimConfig::validate() const {
  const auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (n_proper == 0) fail("n_proper must be >= 1");
  if (n_improper == 0) fail("n_improper must be >= 1");
  if (!std::isfinite(proper_logit_mean) || !std::isfinite(improper_logit)) fail("logits must be finite");
  if (!(proper_logit_mean > improper_logit)) fail("proper_logit_mean must exceed improper_logit");
  if (!(proper_logit_sigma >= 0.0) || !std::isfinite(proper_logit_sigma)) fail("proper_logit_sigma must be >= 0");
  if (steps == 0) fail("steps must be >= 1");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) fail("alpha must be > 1");
  if (trials == 0) fail("trials must be >= 1");
  grid.validate();
  std::vector<std::string> warnings;
  if (n_proper >= n_improper) warnings.emplace_back("n_proper >= n_improper; the model assumes N0 << N1");
  return warnings;
}

double SimTrace::mean_entropy() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& st : steps) s += st.entropy;
  return s / static_cast<double>(steps.size());
}

std::size_t SimTrace::improper_count() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const SimStep& s) { return s.outcome == Outcome::Improper; }));
}

Eigen::ArrayXd draw_proper_logits(const SimConfig& config, Stream& rng) {
  Eigen::ArrayXd l(static_cast<Eigen::Index>(config.n_proper));
  for (Eigen::Index j = 0; j < l.size(); ++j) l[j] = rng.normal(config.proper_logit_mean, config.proper_logit_sigma);
  return l;
}

Eigen::ArrayXd trial_proper_logits(const SimConfig& config, std::size_t trial_index) {
  Stream rng(config.seed, {stream_tag::kProperLogits, trial_index});
  return draw_proper_logits(config, rng);
}

double initial_error_rate(const Eigen::ArrayXd& proper_logits, const SimConfig& config, double temperature) {
  require_positive_temperature(temperature);
  const Eigen::ArrayXd scaled = proper_logits / temperature;
  const double improper = config.improper_logit / temperature;
  const double shift = std::max(scaled.maxCoeff(), improper);
  const double z0 = (scaled - shift).exp().sum();
  const double z1 = static_cast<double>(config.n_improper) * std::exp(improper - shift);
  return z1 / (z0 + z1);
}

double update_error_rate(double x, Outcome outcome, double alpha, double x_init) {
  if (outcome == Outcome::Improper) return 1.0 - std::pow(1.0 - x, alpha);
  return std::max(std::pow(x, alpha), x_init);
}

StepDistribution step_distribution(double x, const Eigen::ArrayXd& proper_logits, const SimConfig& config,
                                   double temperature) {
  require_positive_temperature(temperature);
  const auto block = proper_block(proper_logits, config, temperature);
  return StepDistribution{(1.0 - x) * block.q, x / static_cast<double>(config.n_improper)};
}

double step_entropy(double x, const Eigen::ArrayXd& proper_logits, const SimConfig& config, double temperature) {
  require_positive_temperature(temperature);
  const auto d = step_distribution(x, proper_logits, config, temperature);
  const double improper = x > 0.0 ? x * (std::log(static_cast<double>(config.n_improper)) - std::log(x)) : 0.0;
  return entropy_nats(d.proper) + improper;
}

SimTrace run_process(const Eigen::ArrayXd& proper_logits, const SimConfig& config, double temperature,
                     std::size_t steps, const std::function<bool(double)>& draw) {
  require_positive_temperature(temperature);
  const auto block = proper_block(proper_logits, config, temperature);
  const double log_n1 = std::log(static_cast<double>(config.n_improper));
  SimTrace trace;
  trace.x_init = initial_error_rate(proper_logits, config, temperature);
  trace.steps.reserve(steps);
  double x = trace.x_init;
  for (std::size_t t = 0; t < steps; ++t) {
    SimStep step;
    step.error_rate = x;
    step.entropy = block_entropy(x, block, log_n1);
    step.outcome = draw(x) ? Outcome::Improper : Outcome::Proper;
    trace.steps.push_back(step);
    x = update_error_rate(x, step.outcome, config.alpha, trace.x_init);
  }
  return trace;
}

SimTrace run_trial(const SimConfig& config, double temperature, std::size_t grid_index, std::size_t trial_index) {
  const auto logits = trial_proper_logits(config, trial_index);
  Stream rng(config.seed, {stream_tag::kOutcomes, grid_index, trial_index});
  return run_process(logits, config, temperature, config.steps, [&rng](double x) { return rng.uniform() < x; });
}

SimCurves simulate_curves(const SimConfig& config) {
  config.validate();
  const auto temps = config.grid.points();
  const std::size_t n_t = temps.size();
  const std::size_t trials = config.trials;

  std::vector<double> trace_mean(n_t * trials);
  std::vector<std::size_t> trace_improper(n_t * trials);
  parallel_for(n_t * trials, config.workers, [&](std::size_t k) {
    const std::size_t g = k / trials;
    const auto trace = run_trial(config, temps[g], g, k % trials);
    trace_mean[k] = trace.mean_entropy();
    trace_improper[k] = trace.improper_count();
  });

  SimCurves out;
  auto& c = out.curve;
  const auto n = static_cast<Eigen::Index>(n_t);
  c.temperature = Eigen::Map<const Eigen::ArrayXd>(temps.data(), n);
  c.mean_entropy.resize(n);
  c.variance.resize(n);
  c.n_samples.assign(n_t, trials);
  out.improper_fraction.resize(n);
  for (std::size_t g = 0; g < n_t; ++g) {
    const Eigen::Map<const Eigen::ArrayXd> means(trace_mean.data() + g * trials, static_cast<Eigen::Index>(trials));
    const double mean = means.mean();
    const auto j = static_cast<Eigen::Index>(g);
    c.mean_entropy[j] = mean;
    c.variance[j] = trials > 1 ? (means - mean).square().sum() / static_cast<double>(trials - 1) : 0.0;
    std::size_t improper = 0;
    for (std::size_t r = 0; r < trials; ++r) improper += trace_improper[g * trials + r];
    out.improper_fraction[j] = static_cast<double>(improper) / static_cast<double>(trials * config.steps);
  }
  return out;
}

std::string sim_curves_to_csv(const SimCurves& curves) {
  std::string out = "temperature,mean_entropy,improper_fraction\n";
  for (Eigen::Index j = 0; j < curves.curve.size(); ++j) {
    out += io::format_double(curves.curve.temperature[j]) + ',' + io::format_double(curves.curve.mean_entropy[j]) +
           ',' + io::format_double(curves.improper_fraction[j]) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

RecordSet export_records(const SimConfig& config, double temperature, std::size_t grid_index,
                         const ExportOptions& options) {
  config.validate();
  require_positive_temperature(temperature);
  if (options.steps == 0) throw Error(ErrorCode::InvalidArgument, "export needs steps >= 1");
  const std::size_t n0 = config.n_proper;
  const std::size_t n1 = config.n_improper;
  const std::size_t full = n0 + n1;
  const std::size_t depth = options.depth == 0 ? full : std::min(options.depth, full);

  // Vocabularies keyed by (proper tokens kept, improper tokens kept). When
  // every proper token is kept the names do not depend on the trial.
  std::map<std::pair<std::size_t, std::size_t>, Vocabulary> shared_vocab;

  RecordSet out(options.records);
  for (std::size_t r = 0; r < options.records; ++r) {
    const auto logits = trial_proper_logits(config, r);
    const auto block = proper_block(logits, config, temperature);
    Stream outcomes(config.seed, {stream_tag::kOutcomes, grid_index, r});
    const auto trace = run_process(logits, config, temperature, options.steps,
                                   [&outcomes](double x) { return outcomes.uniform() < x; });
    Stream choice(config.seed, {stream_tag::kTokenChoice, grid_index, r});

    std::vector<Eigen::Index> by_q(n0);
    std::iota(by_q.begin(), by_q.end(), Eigen::Index{0});
    std::stable_sort(by_q.begin(), by_q.end(), [&](Eigen::Index a, Eigen::Index b) { return block.q[a] > block.q[b]; });
    std::map<std::pair<std::size_t, std::size_t>, Vocabulary> trial_vocab;

    auto& rec = out[r];
    rec.problem_id = options.problem_prefix + "-" + std::to_string(r);
    rec.temperature = temperature;
    rec.sample_index = 0;
    rec.steps.reserve(options.steps);
    std::optional<std::size_t> first_error;
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
      const double x = trace.steps[t].error_rate;
      const double each_improper = x / static_cast<double>(n1);

      // Most probable `depth` entries: proper tokens at or above the improper
      // level, then improper tokens, then the remaining proper tokens.
      std::size_t above = 0;
      while (above < n0 && (1.0 - x) * block.q[by_q[above]] >= each_improper) ++above;
      const std::size_t keep_high = std::min(above, depth);
      const std::size_t keep_improper = std::min(n1, depth - keep_high);
      const std::size_t keep_proper = std::min(n0, keep_high + (depth - keep_high - keep_improper));

      // Kept proper tokens appear in original index order.
      std::vector<Eigen::Index> kept(by_q.begin(), by_q.begin() + static_cast<std::ptrdiff_t>(keep_proper));
      std::sort(kept.begin(), kept.end());
      const auto key = std::make_pair(keep_proper, keep_improper);
      auto& cache = keep_proper == n0 ? shared_vocab : trial_vocab;
      auto it = cache.find(key);
      if (it == cache.end()) {
        TokenList names;
        names.reserve(keep_proper + keep_improper);
        for (const auto j : kept) names.push_back(index_name('p', static_cast<std::size_t>(j)));
        for (std::size_t i = 0; i < keep_improper; ++i) names.push_back(index_name('i', i));
        it = cache.emplace(key, Vocabulary(std::move(names))).first;
      }

      Eigen::ArrayXd base(static_cast<Eigen::Index>(keep_proper + keep_improper));
      Eigen::Index e = 0;
      for (const auto j : kept) base[e++] = temperature * std::log(std::max((1.0 - x) * block.q[j], kProbabilityFloor));
      const double improper_logit = temperature * std::log(std::max(each_improper, kProbabilityFloor));
      for (std::size_t i = 0; i < keep_improper; ++i) base[e++] = improper_logit;

      std::string chosen;
      if (trace.steps[t].outcome == Outcome::Improper) {
        chosen = index_name('i', static_cast<std::size_t>(choice.below(n1)));
        if (!first_error) first_error = t;
      } else {
        const double u = choice.uniform();
        double acc = 0.0;
        Eigen::Index pick = static_cast<Eigen::Index>(n0) - 1;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n0); ++j) {
          acc += block.q[j];
          if (u < acc) {
            pick = j;
            break;
          }
        }
        chosen = index_name('p', static_cast<std::size_t>(pick));
      }
      rec.steps.push_back(StepRecord{std::move(chosen), TokenDist(it->second, std::move(base))});
    }
    rec.answer = first_error ? "err-" + std::to_string(*first_error) : std::string("ok");
    rec.correct = !first_error.has_value();
    rec.score = 1.0 - static_cast<double>(trace.improper_count()) / static_cast<double>(trace.steps.size());
    rec.meta = {{"source", "sim"}, {"x_init", io::format_double(trace.x_init)}};
  }
  return out;
}

RecordSet synth_task_samples(const SimConfig& config, double temperature, std::size_t n_samples, std::size_t steps,
                             std::uint64_t seed, std::size_t problem_index) {
  config.validate();
  require_positive_temperature(temperature);
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "synthetic task needs steps >= 1");
  Stream problem_rng(seed, {stream_tag::kSynthProblem, problem_index});
  const auto logits = draw_proper_logits(config, problem_rng);
  const auto t_key = std::bit_cast<std::uint64_t>(round_temperature(temperature));

  RecordSet out(n_samples);
  parallel_for(n_samples, config.workers, [&](std::size_t s) {
    Stream rng(seed, {stream_tag::kSynthOutcomes, t_key, problem_index, s});
    const auto trace = run_process(logits, config, temperature, steps, [&rng](double x) { return rng.uniform() < x; });
    std::optional<std::size_t> first_error;
    for (std::size_t t = 0; t < trace.steps.size() && !first_error; ++t) {
      if (trace.steps[t].outcome == Outcome::Improper) first_error = t;
    }
    auto& rec = out[s];
    rec.problem_id = "synth-" + std::to_string(problem_index);
    rec.temperature = temperature;
    rec.sample_index = static_cast<long long>(s);
    rec.answer = first_error ? "err-" + std::to_string(*first_error) : std::string("ok");
    rec.correct = !first_error.has_value();
    rec.score = 1.0 - static_cast<double>(trace.improper_count()) / static_cast<double>(steps);
  });
  return out;
}

// ---------------------------------------------------------------------------

SimConfig sim_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  static const std::set<std::string> known = {"n_proper", "n_improper", "proper_logit_mean", "proper_logit_sigma",
                                              "improper_logit", "steps", "alpha", "trials", "seed", "temp_grid",
                                              "literal_proper_softmax", "workers"};
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw Error(ErrorCode::InvalidConfig, "unknown config field '" + k + "'");
  }
  SimConfig c;
  try {
    const auto count = [&](const char* key, std::size_t& dst) {
      if (!j.contains(key)) return;
      if (!j[key].is_number_integer() || j[key].get<long long>() < 0) {
        throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be a nonnegative integer");
      }
      dst = j[key].get<std::size_t>();
    };
    const auto real = [&](const char* key, double& dst) {
      if (!j.contains(key)) return;
      if (!j[key].is_number()) throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be a number");
      dst = j[key].get<double>();
    };
    count("n_proper", c.n_proper);
    count("n_improper", c.n_improper);
    real("proper_logit_mean", c.proper_logit_mean);
    real("proper_logit_sigma", c.proper_logit_sigma);
    real("improper_logit", c.improper_logit);
    count("steps", c.steps);
    real("alpha", c.alpha);
    count("trials", c.trials);
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer()) throw Error(ErrorCode::InvalidConfig, "seed must be an integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("temp_grid")) {
      const auto& g = j["temp_grid"];
      if (!g.is_object()) throw Error(ErrorCode::InvalidConfig, "temp_grid must be {start, step, max}");
      c.grid.start = g.value("start", c.grid.start);
      c.grid.step = g.value("step", c.grid.step);
      c.grid.max = g.value("max", c.grid.max);
    }
    if (j.contains("literal_proper_softmax")) c.literal_proper_softmax = j["literal_proper_softmax"].get<bool>();
    if (j.contains("workers")) c.workers = j["workers"].get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  c.validate();
  return c;
}

std::string sim_config_to_json(const SimConfig& c) {
  nlohmann::ordered_json j;
  j["n_proper"] = c.n_proper;
  j["n_improper"] = c.n_improper;
  j["proper_logit_mean"] = c.proper_logit_mean;
  j["proper_logit_sigma"] = c.proper_logit_sigma;
  j["improper_logit"] = c.improper_logit;
  j["steps"] = c.steps;
  j["alpha"] = c.alpha;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["temp_grid"] = {{"start", c.grid.start}, {"step", c.grid.step}, {"max", c.grid.max}};
  j["literal_proper_softmax"] = c.literal_proper_softmax;
  return j.dump(2);
}

}  // namespace turnpoint::sim
