// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/taskdist.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "turnpoint/error.hpp"
#include "turnpoint/grid.hpp"
#include "turnpoint/io.hpp"
#include "turnpoint/parallel.hpp"

namespace turnpoint {

DistanceReport model_task_distance(const RecordSet& records, const DistanceOptions& options) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records");
  const double t0 = round_temperature(records.front().temperature);
  for (const auto& r : records) {
    if (std::abs(r.temperature - t0) > kTemperatureTolerance)
      throw Error(ErrorCode::InvalidArgument, "records span several temperatures (" + io::format_double(t0) + " and " +
                                                  io::format_double(r.temperature) + ")");
  }

  DistanceReport report;
  report.measurement_temperature = t0;
  if (std::abs(t0 - kDistanceTemperature) > kTemperatureTolerance)
    report.warnings.push_back("measured at T=" + io::format_double(t0) + " instead of 0.5");

  std::vector<double> per_record(records.size(), 0.0);
  const Temperature t(t0, std::numeric_limits<double>::infinity());
  parallel_for(records.size(), options.workers, [&](std::size_t i) {
    const auto& steps = records[i].steps;
    double sum = 0.0;
    for (const auto& s : steps) sum += step_entropy(s.topk, t, options.entropy);
    per_record[i] = steps.empty() ? 0.0 : sum / static_cast<double>(steps.size());
  });

  // Sums in sample_index order so the result ignores input order.
  std::map<std::string, std::map<long long, double>> by_problem;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].steps.empty()) {
      ++skipped;
      continue;
    }
    by_problem[records[i].problem_id][records[i].sample_index] = per_record[i];
  }
  if (skipped > 0) report.warnings.push_back(std::to_string(skipped) + " record(s) without steps skipped");
  if (by_problem.empty()) throw Error(ErrorCode::EmptyInput, "no record has steps");

  double total = 0.0;
  for (const auto& [id, samples] : by_problem) {
    double s = 0.0;
    for (const auto& [idx, h] : samples) s += h;
    const double mean = s / static_cast<double>(samples.size());
    report.per_instance_means.push_back(mean);
    total += mean;
  }
  report.n_instances = by_problem.size();
  report.distance = total / static_cast<double>(report.n_instances);
  return report;
}

std::string distance_report_to_json(const DistanceReport& r) {
  nlohmann::ordered_json j;
  j["distance"] = r.distance;
  j["n_instances"] = r.n_instances;
  j["per_instance_means"] = r.per_instance_means;
  j["measurement_temperature"] = r.measurement_temperature;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw Error(ErrorCode::PairedInputMismatch,
                "lists differ in length (" + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) + ")");
  if (xs.size() < 2) throw Error(ErrorCode::InvalidArgument, "correlation needs at least 2 points");
  const auto n = static_cast<Eigen::Index>(xs.size());
  const Eigen::ArrayXd x = Eigen::Map<const Eigen::ArrayXd>(xs.data(), n);
  const Eigen::ArrayXd y = Eigen::Map<const Eigen::ArrayXd>(ys.data(), n);
  const Eigen::ArrayXd dx = x - x.mean();
  const Eigen::ArrayXd dy = y - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  // Relative test: a constant list can leave rounding residue in dx.
  const double scale_x = x.abs().maxCoeff();
  const double scale_y = y.abs().maxCoeff();
  if (std::sqrt(sxx) <= 1e-12 * scale_x * static_cast<double>(n) || sxx == 0.0)
    throw Error(ErrorCode::DegenerateVariance, "first list is constant");
  if (std::sqrt(syy) <= 1e-12 * scale_y * static_cast<double>(n) || syy == 0.0)
    throw Error(ErrorCode::DegenerateVariance, "second list is constant");
  const double r = (dx * dy).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<CorrelationRow> parse_correlation_csv(const std::string& text) {
  const auto rows = io::parse_csv(text);
  if (rows.empty() || rows.front() != std::vector<std::string>{"model_label", "distance", "midpoint"})
    throw Error(ErrorCode::ParseError, "expected header model_label,distance,midpoint");
  std::vector<CorrelationRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) throw Error(ErrorCode::ParseError, "row " + std::to_string(i + 1) + " needs 3 fields");
    out.push_back({rows[i][0], io::parse_double(rows[i][1]), io::parse_double(rows[i][2])});
  }
  return out;
}

}  // namespace turnpoint
