// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

// Multi-sample aggregation (majority voting, best-of-N), accuracy surfaces
// over (temperature, sample size), epsilon-optimal temperature ranges and
// the hit / gap / drop scores of a predicted temperature.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "turnpoint/records.hpp"
#include "turnpoint/turn.hpp"

namespace turnpoint {

using Normalizer = std::function<std::string(std::string_view)>;

/// Trims, collapses internal whitespace runs to one space, ASCII case-folds.
std::string default_normalize(std::string_view raw);
std::string identity_normalize(std::string_view raw);

std::string normalize_answer(std::string_view raw, const Normalizer& normalizer = default_normalize);

struct Sample {
  std::string answer;
  std::string normalized_answer;
  std::optional<bool> correct;
  std::optional<double> score;
  double temperature = 1.0;
  long long sample_index = 0;
};

/// Samples of each problem at one temperature, keyed by problem id.
using SampleSet = std::map<std::string, std::vector<Sample>>;
using SamplesByTemperature = std::map<double, SampleSet>;

/// Groups records by temperature and problem. Records without an answer
/// contribute the empty answer.
SamplesByTemperature group_samples(const RecordSet& records, const Normalizer& normalizer = default_normalize);

struct VoteResult {
  std::string answer;
  std::size_t count = 0;
  /// Another answer reached the same count.
  bool tie = false;
  /// Index into the input of the earliest sample carrying `answer`.
  std::size_t representative = 0;
};

/// Most frequent normalized answer; ties go to the answer whose earliest
/// sample_index is smallest. Throws EmptySampleSet.
VoteResult majority_vote(std::span<const Sample> samples);

/// Index of the highest-score sample; ties go to the earliest sample_index.
/// Throws EmptySampleSet, or MissingReward if any score is absent.
std::size_t best_of_n(std::span<const Sample> samples);

/// Probability that K draws without replacement from N samples, C of them
/// correct, include a correct one: 1 - C(N-C, K) / C(N, K).
double pass_at_k(std::size_t n, std::size_t c, std::size_t k);

struct AccuracyHeatmap {
  std::vector<double> temperatures;
  std::vector<std::size_t> sample_sizes;
  /// rows = sample sizes, columns = temperatures
  Eigen::MatrixXd accuracy;
  std::size_t resamples = 0;
  std::uint64_t seed = 0;

  /// Accuracy by temperature for one sample size.
  std::map<double, double> row(std::size_t sample_size) const;
};

struct HeatmapOptions {
  Aggregation aggregation = Aggregation::MajorityVoting;
  std::size_t resamples = 100;
  std::uint64_t seed = 0;
  /// Best-of-N only: pick by score and resample instead of the analytic
  /// perfect-verifier pass@K.
  bool use_scores = false;
  unsigned workers = 0;
};

/// Majority voting: mean over problems and `resamples` without-replacement
/// subsets of size s of the indicator "the vote winner is correct".
/// Best-of-N (perfect verifier): mean over problems of pass@s.
/// Throws SampleSizeTooLarge when some problem has fewer than s samples.
AccuracyHeatmap accuracy_heatmap(const SamplesByTemperature& sets, std::span<const std::size_t> sample_sizes,
                                 const HeatmapOptions& options = {});

/// CSV: header `sample_size,<T1>,<T2>,...`, one row per sample size.
std::string heatmap_to_csv(const AccuracyHeatmap& heatmap);

struct EpsRange {
  double epsilon = 0.02;
  double low = 0.0;
  double high = 0.0;
  double midpoint = 0.0;
  double peak_temperature = 0.0;
  double peak_accuracy = 0.0;
  /// Qualifying temperatures cut off from the peak by a non-qualifying one.
  std::vector<double> excluded;
};

/// Maximal contiguous run of grid temperatures around the peak whose
/// accuracy is >= peak - epsilon. Peak ties go to the lowest temperature.
EpsRange eps_optimal_range(const std::map<double, double>& accuracy_by_temperature, double epsilon = 0.02);

struct PredictionScore {
  bool hit = false;
  double temperature_gap = 0.0;
  double performance_drop = 0.0;
  double snapped_temperature = 0.0;
};

PredictionScore evaluate_prediction(double predicted, const EpsRange& range,
                                    const std::map<double, double>& accuracy_by_temperature);

struct BetaCalibration {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double difference = 0.0;
  /// difference rounded to one decimal
  double rounded = 0.0;
};

BetaCalibration calibrate_beta(std::span<const double> midpoints_a, std::span<const double> midpoints_b);

std::string eps_range_to_json(const EpsRange& range);
std::string prediction_score_to_json(const PredictionScore& score);
std::string beta_calibration_to_json(const BetaCalibration& beta);

}  // namespace turnpoint
