// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

// Entropy-turning-point temperature selection.
//
// The mean token entropy H(T) of a model's own samples grows slowly at low
// temperature and then explodes. On ln H(T) the slow part is concave and the
// explosive part convex; the first grid point where the discrete second
// difference turns positive is the turning point, and the selected
// temperature is that point plus a per-aggregation offset.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "turnpoint/curve.hpp"
#include "turnpoint/dist.hpp"
#include "turnpoint/records.hpp"

namespace turnpoint {

enum class Aggregation { MajorityVoting, BestOfN };

/// Offset added to the turning point: 0 for majority voting, +0.1 for best-of-N.
constexpr double adaptation_beta(Aggregation a) noexcept { return a == Aggregation::BestOfN ? 0.1 : 0.0; }

std::string_view to_string(Aggregation a) noexcept;
/// Accepts "majority", "majority-voting", "best-of-n", "bon".
Aggregation parse_aggregation(std::string_view text);

enum class CurveWeighting {
  /// Mean over steps per record, then mean over records.
  PerSequence,
  /// Mean over all steps pooled across records.
  PerToken,
};

struct CurveOptions {
  EntropyOptions entropy{};
  CurveWeighting weighting = CurveWeighting::PerSequence;
  unsigned workers = 0;
};

struct CurveDiagnostics {
  std::size_t records_used = 0;
  std::size_t skipped_without_steps = 0;
  std::size_t off_grid = 0;
  std::vector<std::string> warnings;
};

struct CurveEstimate {
  EntropyCurve curve;
  CurveDiagnostics diagnostics;
};

/// Trajectory mode: each record is scored at its own generation temperature.
/// Throws MissingTemperatureData naming the first grid point with no record.
CurveEstimate estimate_curve(const RecordSet& records, std::span<const double> grid, const CurveOptions& options = {});

/// Counterfactual mode: the same fixed trajectories (all generated at one
/// temperature) re-scored at every grid temperature.
CurveEstimate counterfactual_curve(const RecordSet& fixed_records, std::span<const double> grid,
                                   const CurveOptions& options = {});

/// ln(max(H, 1e-9)) after an optional centered moving average of odd width.
/// The window shrinks symmetrically near the ends.
Eigen::ArrayXd log_curve(const EntropyCurve& curve, std::size_t smoothing_window = 1);

/// Second differences of the log curve at interior points 1..n-2.
Eigen::ArrayXd log_second_differences(const EntropyCurve& curve, std::size_t smoothing_window = 1);

struct TurningPoint {
  std::size_t index = 0;
  Eigen::ArrayXd second_differences;  // interior points, index j at [j - 1]
};

/// First interior j with D2_j > zero_tol whose preceding interior point has
/// D2 <= zero_tol. Throws CurveTooShort (< 3 points) or NoTurningPoint.
TurningPoint find_turning_point(const EntropyCurve& curve, std::size_t smoothing_window = 1, double zero_tol = 1e-6);

struct SelectOptions {
  std::size_t smoothing_window = 1;
  double zero_tol = 1e-6;
  /// Retry with this window on NoTurningPoint; 0 disables the retry.
  std::size_t retry_window = 3;
  /// Upper clamp; defaults to the last grid temperature.
  std::optional<double> t_max;
};

struct TurnResult {
  std::size_t entp_index = 0;
  double entp_temperature = 0.0;
  double beta = 0.0;
  double predicted_temperature = 0.0;
  std::vector<double> second_differences;
  bool fallback_used = false;
  bool clamped = false;
  std::size_t smoothing_window = 1;
};

TurnResult select_temperature(const EntropyCurve& curve, Aggregation aggregation, const SelectOptions& options = {});

std::string turn_result_to_json(const TurnResult& result);

struct StabilityRow {
  std::size_t sample_size = 0;
  std::size_t resamples = 0;
  /// Variance across resamples of each grid point's mean, averaged over the grid.
  double mean_entropy_variance = 0.0;
  double prediction_variance = 0.0;
  /// max - min of the predicted temperatures.
  double prediction_spread = 0.0;
  double prediction_mean = 0.0;
  std::size_t failures = 0;
};

struct StabilityOptions {
  CurveOptions curve{};
  SelectOptions select{};
  Aggregation aggregation = Aggregation::MajorityVoting;
  std::size_t resamples = 20;
  std::uint64_t seed = 0;
};

/// Subsamples n records per grid temperature without replacement and
/// reports how much the curve and the prediction move. Throws
/// SampleSizeTooLarge if some temperature has fewer than n records.
std::vector<StabilityRow> curve_stability_report(const RecordSet& records, std::span<const double> grid,
                                                 std::span<const std::size_t> sample_sizes,
                                                 const StabilityOptions& options = {});

std::string stability_to_csv(std::span<const StabilityRow> rows);

}  // namespace turnpoint
