// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

// Model-task distance: the mean token entropy of a model's own generations
// on a task at a low temperature. Lower distance goes with a higher optimal
// sampling temperature.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "turnpoint/dist.hpp"
#include "turnpoint/records.hpp"

namespace turnpoint {

inline constexpr double kDistanceTemperature = 0.5;

struct DistanceReport {
  double distance = 0.0;
  std::size_t n_instances = 0;
  /// One entry per problem id, in problem id order.
  std::vector<double> per_instance_means;
  double measurement_temperature = kDistanceTemperature;
  std::vector<std::string> warnings;
};

struct DistanceOptions {
  EntropyOptions entropy{};
  unsigned workers = 0;
};

/// Per record: mean step entropy at the record's temperature. Records of one
/// problem are averaged before averaging over problems. Records without
/// steps are skipped with a warning. Throws EmptyInput, or InvalidArgument
/// when records span more than one temperature.
DistanceReport model_task_distance(const RecordSet& records, const DistanceOptions& options = {});

std::string distance_report_to_json(const DistanceReport& report);

/// Product-moment correlation. Throws PairedInputMismatch (lengths differ),
/// InvalidArgument (fewer than 2 points) or DegenerateVariance.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

struct CorrelationRow {
  std::string model_label;
  double distance = 0.0;
  double midpoint = 0.0;
};

/// CSV with header `model_label,distance,midpoint`.
std::vector<CorrelationRow> parse_correlation_csv(const std::string& text);

}  // namespace turnpoint
