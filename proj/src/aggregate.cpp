// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/aggregate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "turnpoint/error.hpp"
#include "turnpoint/grid.hpp"
#include "turnpoint/io.hpp"
#include "turnpoint/parallel.hpp"
#include "turnpoint/rng.hpp"

namespace turnpoint {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// A problem's samples reduced to integer answer ids.
struct EncodedProblem {
  std::vector<int> answer;
  std::vector<long long> sample_index;
  std::vector<std::uint8_t> correct;
  std::vector<double> score;
  int n_answers = 0;
};

EncodedProblem encode(const std::vector<Sample>& samples, bool need_correct, bool need_score) {
  EncodedProblem p;
  std::unordered_map<std::string, int> ids;
  for (const auto& s : samples) {
    auto [it, inserted] = ids.try_emplace(s.normalized_answer, p.n_answers);
    if (inserted) ++p.n_answers;
    p.answer.push_back(it->second);
    p.sample_index.push_back(s.sample_index);
    if (need_correct && !s.correct)
      throw Error(ErrorCode::InvalidArgument, "sample without a correctness flag (index " +
                                                  std::to_string(s.sample_index) + ")");
    p.correct.push_back(s.correct.value_or(false) ? 1 : 0);
    if (need_score && !s.score)
      throw Error(ErrorCode::MissingReward, "sample " + std::to_string(s.sample_index) + " has no score");
    p.score.push_back(s.score.value_or(0.0));
  }
  return p;
}

// Majority vote over the subset `pick`; returns whether the winner is correct.
bool vote_subset(const EncodedProblem& p, std::span<const std::size_t> pick, std::vector<std::size_t>& counts,
                 std::vector<std::size_t>& first) {
  std::fill(counts.begin(), counts.end(), 0);
  std::fill(first.begin(), first.end(), std::numeric_limits<std::size_t>::max());
  for (const auto i : pick) {
    const auto a = static_cast<std::size_t>(p.answer[i]);
    ++counts[a];
    if (first[a] == std::numeric_limits<std::size_t>::max() || p.sample_index[i] < p.sample_index[first[a]])
      first[a] = i;
  }
  std::size_t best = 0;
  bool have = false;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) continue;
    if (!have || counts[a] > counts[best] ||
        (counts[a] == counts[best] && p.sample_index[first[a]] < p.sample_index[first[best]])) {
      best = a;
      have = true;
    }
  }
  return p.correct[first[best]] != 0;
}

bool best_subset(const EncodedProblem& p, std::span<const std::size_t> pick) {
  std::size_t best = pick[0];
  for (const auto i : pick) {
    if (p.score[i] > p.score[best] || (p.score[i] == p.score[best] && p.sample_index[i] < p.sample_index[best]))
      best = i;
  }
  return p.correct[best] != 0;
}

}  // namespace

std::string default_normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (const char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string identity_normalize(std::string_view raw) { return std::string(raw); }

std::string normalize_answer(std::string_view raw, const Normalizer& normalizer) {
  return normalizer ? normalizer(raw) : std::string(raw);
}

SamplesByTemperature group_samples(const RecordSet& records, const Normalizer& normalizer) {
  SamplesByTemperature out;
  for (const auto& r : records) {
    Sample s;
    s.answer = r.answer.value_or("");
    s.normalized_answer = normalize_answer(s.answer, normalizer);
    s.correct = r.correct;
    s.score = r.score;
    s.temperature = round_temperature(r.temperature);
    s.sample_index = r.sample_index;
    out[s.temperature][r.problem_id].push_back(std::move(s));
  }
  for (auto& [t, set] : out) {
    for (auto& [id, samples] : set) {
      std::stable_sort(samples.begin(), samples.end(),
                       [](const Sample& a, const Sample& b) { return a.sample_index < b.sample_index; });
      for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].sample_index == samples[i - 1].sample_index)
          throw Error(ErrorCode::RejectedDuplicate, "duplicate sample_index " + std::to_string(samples[i].sample_index) +
                                                        " for problem " + id);
      }
    }
  }
  return out;
}

VoteResult majority_vote(std::span<const Sample> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptySampleSet, "majority vote over no samples");
  struct Tally {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string_view, Tally> tally;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, inserted] = tally.try_emplace(samples[i].normalized_answer, Tally{0, i});
    ++it->second.count;
    if (samples[i].sample_index < samples[it->second.first].sample_index) it->second.first = i;
  }
  const Tally* best = nullptr;
  for (const auto& [answer, t] : tally) {
    if (!best || t.count > best->count ||
        (t.count == best->count && samples[t.first].sample_index < samples[best->first].sample_index))
      best = &t;
  }
  VoteResult v;
  v.count = best->count;
  v.representative = best->first;
  v.answer = samples[best->first].normalized_answer;
  for (const auto& [answer, t] : tally) {
    if (&t != best && t.count == best->count) v.tie = true;
  }
  return v;
}

std::size_t best_of_n(std::span<const Sample> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptySampleSet, "best-of-N over no samples");
  for (const auto& s : samples) {
    if (!s.score) throw Error(ErrorCode::MissingReward, "sample " + std::to_string(s.sample_index) + " has no score");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double a = *samples[i].score;
    const double b = *samples[best].score;
    if (a > b || (a == b && samples[i].sample_index < samples[best].sample_index)) best = i;
  }
  return best;
}

double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "pass@K needs K >= 1");
  if (k > n) throw Error(ErrorCode::InvalidArgument, "pass@K needs K <= N");
  if (c > n) throw Error(ErrorCode::InvalidArgument, "pass@K needs C <= N");
  if (c == 0) return 0.0;
  if (k > n - c) return 1.0;
  double miss = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  return 1.0 - miss;
}

std::map<double, double> AccuracyHeatmap::row(std::size_t sample_size) const {
  const auto it = std::find(sample_sizes.begin(), sample_sizes.end(), sample_size);
  if (it == sample_sizes.end())
    throw Error(ErrorCode::InvalidArgument, "sample size " + std::to_string(sample_size) + " not in heatmap");
  const auto r = static_cast<Eigen::Index>(it - sample_sizes.begin());
  std::map<double, double> out;
  for (std::size_t j = 0; j < temperatures.size(); ++j) out[temperatures[j]] = accuracy(r, static_cast<Eigen::Index>(j));
  return out;
}

AccuracyHeatmap accuracy_heatmap(const SamplesByTemperature& sets, std::span<const std::size_t> sample_sizes,
                                 const HeatmapOptions& options) {
  if (sets.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
  if (sample_sizes.empty()) throw Error(ErrorCode::InvalidArgument, "no sample sizes");
  const bool analytic = options.aggregation == Aggregation::BestOfN && !options.use_scores;
  if (!analytic && options.resamples == 0) throw Error(ErrorCode::InvalidArgument, "resamples must be >= 1");

  AccuracyHeatmap h;
  h.sample_sizes.assign(sample_sizes.begin(), sample_sizes.end());
  std::sort(h.sample_sizes.begin(), h.sample_sizes.end());
  h.sample_sizes.erase(std::unique(h.sample_sizes.begin(), h.sample_sizes.end()), h.sample_sizes.end());
  if (h.sample_sizes.front() == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be >= 1");
  h.resamples = analytic ? 0 : options.resamples;
  h.seed = options.seed;

  std::vector<std::vector<EncodedProblem>> problems;
  const bool need_score = options.aggregation == Aggregation::BestOfN && options.use_scores;
  for (const auto& [t, set] : sets) {
    if (set.empty()) throw Error(ErrorCode::EmptySampleSet, "no problems at T=" + io::format_double(t));
    h.temperatures.push_back(t);
    auto& enc = problems.emplace_back();
    for (const auto& [id, samples] : set) {
      if (samples.size() < h.sample_sizes.back())
        throw Error(ErrorCode::SampleSizeTooLarge, "problem " + id + " at T=" + io::format_double(t) + " has " +
                                                       std::to_string(samples.size()) + " samples, need " +
                                                       std::to_string(h.sample_sizes.back()));
      enc.push_back(encode(samples, true, need_score));
    }
  }

  const auto n_t = h.temperatures.size();
  const auto n_s = h.sample_sizes.size();
  h.accuracy = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_s), static_cast<Eigen::Index>(n_t));
  parallel_for(n_t * n_s, options.workers, [&](std::size_t cell) {
    const auto ti = cell / n_s;
    const auto si = cell % n_s;
    const auto s = h.sample_sizes[si];
    const auto& probs = problems[ti];
    double total = 0.0;
    for (std::size_t pi = 0; pi < probs.size(); ++pi) {
      const auto& p = probs[pi];
      const auto n = p.answer.size();
      if (analytic) {
        const auto c = static_cast<std::size_t>(std::count(p.correct.begin(), p.correct.end(), 1));
        total += pass_at_k(n, c, s);
        continue;
      }
      std::vector<std::size_t> idx(n);
      std::vector<std::size_t> counts(static_cast<std::size_t>(p.n_answers));
      std::vector<std::size_t> first(static_cast<std::size_t>(p.n_answers));
      std::size_t hits = 0;
      for (std::size_t r = 0; r < options.resamples; ++r) {
        Stream rng(options.seed, {stream_tag::kSubsample, ti, s, pi, r});
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        // Partial Fisher-Yates: the first s slots are a uniform s-subset.
        for (std::size_t i = 0; i < s; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
        const std::span<const std::size_t> pick(idx.data(), s);
        const bool ok = options.aggregation == Aggregation::MajorityVoting ? vote_subset(p, pick, counts, first)
                                                                           : best_subset(p, pick);
        hits += ok ? 1 : 0;
      }
      total += static_cast<double>(hits) / static_cast<double>(options.resamples);
    }
    h.accuracy(static_cast<Eigen::Index>(si), static_cast<Eigen::Index>(ti)) = total / static_cast<double>(probs.size());
  });
  return h;
}

std::string heatmap_to_csv(const AccuracyHeatmap& h) {
  std::string out = "sample_size";
  for (const double t : h.temperatures) out += "," + io::format_double(t);
  out += "\n";
  for (std::size_t i = 0; i < h.sample_sizes.size(); ++i) {
    out += std::to_string(h.sample_sizes[i]);
    for (std::size_t j = 0; j < h.temperatures.size(); ++j)
      out += "," + io::format_double(h.accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out += "\n";
  }
  return out;
}

EpsRange eps_optimal_range(const std::map<double, double>& acc, double epsilon) {
  if (acc.empty()) throw Error(ErrorCode::EmptyInput, "no accuracies");
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  constexpr double kSlack = 1e-12;
  std::vector<double> ts;
  std::vector<double> as;
  for (const auto& [t, a] : acc) {
    ts.push_back(t);
    as.push_back(a);
  }
  std::size_t peak = 0;
  for (std::size_t i = 1; i < as.size(); ++i) {
    if (as[i] > as[peak]) peak = i;
  }
  const double floor = as[peak] - epsilon - kSlack;
  std::size_t lo = peak;
  std::size_t hi = peak;
  while (lo > 0 && as[lo - 1] >= floor) --lo;
  while (hi + 1 < as.size() && as[hi + 1] >= floor) ++hi;

  EpsRange r;
  r.epsilon = epsilon;
  r.low = ts[lo];
  r.high = ts[hi];
  r.midpoint = round_temperature((r.low + r.high) / 2.0);
  r.peak_temperature = ts[peak];
  r.peak_accuracy = as[peak];
  for (std::size_t i = 0; i < as.size(); ++i) {
    if ((i < lo || i > hi) && as[i] >= floor) r.excluded.push_back(ts[i]);
  }
  return r;
}

PredictionScore evaluate_prediction(double predicted, const EpsRange& range,
                                    const std::map<double, double>& acc) {
  if (acc.empty()) throw Error(ErrorCode::EmptyInput, "no accuracies");
  PredictionScore s;
  s.hit = predicted >= range.low - kTemperatureTolerance && predicted <= range.high + kTemperatureTolerance;
  s.temperature_gap =
      s.hit ? 0.0 : round_temperature(std::min(std::abs(predicted - range.low), std::abs(predicted - range.high)));
  // Nearest grid point; a midway prediction snaps down.
  double best_t = acc.begin()->first;
  for (const auto& [t, a] : acc) {
    if (std::abs(t - predicted) < std::abs(best_t - predicted) - kTemperatureTolerance) best_t = t;
  }
  s.snapped_temperature = best_t;
  s.performance_drop = std::max(0.0, range.peak_accuracy - acc.at(best_t));
  return s;
}

BetaCalibration calibrate_beta(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::PairedInputMismatch,
                "midpoint lists differ in length (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw Error(ErrorCode::EmptyInput, "no midpoints");
  BetaCalibration c;
  c.mean_a = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  c.mean_b = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  c.difference = c.mean_a - c.mean_b;
  c.rounded = std::round(c.difference * 10.0) / 10.0;
  return c;
}

std::string eps_range_to_json(const EpsRange& r) {
  nlohmann::ordered_json j;
  j["epsilon"] = r.epsilon;
  j["low"] = r.low;
  j["high"] = r.high;
  j["midpoint"] = r.midpoint;
  j["peak_temperature"] = r.peak_temperature;
  j["peak_accuracy"] = r.peak_accuracy;
  j["excluded"] = r.excluded;
  return j.dump(2) + "\n";
}

std::string prediction_score_to_json(const PredictionScore& s) {
  nlohmann::ordered_json j;
  j["hit"] = s.hit;
  j["temperature_gap"] = s.temperature_gap;
  j["performance_drop"] = s.performance_drop;
  j["snapped_temperature"] = s.snapped_temperature;
  return j.dump(2) + "\n";
}

std::string beta_calibration_to_json(const BetaCalibration& c) {
  nlohmann::ordered_json j;
  j["mean_a"] = c.mean_a;
  j["mean_b"] = c.mean_b;
  j["difference"] = c.difference;
  j["rounded"] = c.rounded;
  return j.dump(2) + "\n";
}

}  // namespace turnpoint
