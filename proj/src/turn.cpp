// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/turn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "turnpoint/error.hpp"
#include "turnpoint/grid.hpp"
#include "turnpoint/io.hpp"
#include "turnpoint/parallel.hpp"
#include "turnpoint/rng.hpp"

namespace turnpoint {

namespace {

constexpr double kLogFloor = 1e-9;

// Sum and count of step entropies for one record scored at one temperature.
struct RecordScore {
  double sum = 0.0;
  std::size_t steps = 0;
  double mean() const { return sum / static_cast<double>(steps); }
};

RecordScore score_record(const SampleRecord& rec, double temperature, const EntropyOptions& entropy) {
  RecordScore s;
  const Temperature t(temperature, std::numeric_limits<double>::infinity());
  for (const auto& step : rec.steps) s.sum += step_entropy(step.topk, t, entropy);
  s.steps = rec.steps.size();
  return s;
}

std::vector<std::size_t> sorted_order(const RecordSet& records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].key() < records[b].key(); });
  return order;
}

// Reduces per-record scores into a curve point under the chosen weighting.
void reduce_point(std::span<const RecordScore> scores, CurveWeighting weighting, double& mean, double& variance) {
  const auto n = scores.size();
  if (weighting == CurveWeighting::PerSequence) {
    double sum = 0.0;
    for (const auto& s : scores) sum += s.mean();
    mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& s : scores) ss += (s.mean() - mean) * (s.mean() - mean);
    variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  } else {
    double sum = 0.0;
    std::size_t steps = 0;
    for (const auto& s : scores) {
      sum += s.sum;
      steps += s.steps;
    }
    mean = sum / static_cast<double>(steps);
    double ss = 0.0;
    for (const auto& s : scores) ss += (s.mean() - mean) * (s.mean() - mean);
    variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  }
}

EntropyCurve assemble_curve(std::span<const double> grid, const std::vector<std::vector<RecordScore>>& by_point,
                            CurveWeighting weighting) {
  EntropyCurve c;
  const auto n = static_cast<Eigen::Index>(grid.size());
  c.temperature = Eigen::Map<const Eigen::ArrayXd>(grid.data(), n);
  c.mean_entropy.resize(n);
  c.variance.resize(n);
  c.n_samples.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto j = static_cast<Eigen::Index>(g);
    reduce_point(by_point[g], weighting, c.mean_entropy[j], c.variance[j]);
    c.n_samples[g] = by_point[g].size();
  }
  c.validate();
  return c;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyInput, "empty temperature grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "grid temperatures must increase");
  }
}

// Population variance computed on values shifted by the first one, so that
// identical inputs give exactly 0.
template <typename Derived>
double shifted_variance(const Eigen::DenseBase<Derived>& v) {
  const Eigen::ArrayXd d = v.derived().array() - v.derived().array()[0];
  return (d - d.mean()).square().mean();
}

Eigen::ArrayXd smooth(const Eigen::ArrayXd& v, std::size_t window) {
  if (window <= 1) return v;
  const auto n = v.size();
  const auto half = static_cast<Eigen::Index>(window / 2);
  Eigen::ArrayXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto h = std::min({half, i, n - 1 - i});
    out[i] = v.segment(i - h, 2 * h + 1).mean();
  }
  return out;
}

}  // namespace

std::string_view to_string(Aggregation a) noexcept {
  return a == Aggregation::BestOfN ? "best-of-n" : "majority-voting";
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "majority" || text == "majority-voting" || text == "mv") return Aggregation::MajorityVoting;
  if (text == "best-of-n" || text == "bon" || text == "best_of_n") return Aggregation::BestOfN;
  throw Error(ErrorCode::InvalidArgument, "unknown aggregation '" + std::string(text) + "'");
}

CurveEstimate estimate_curve(const RecordSet& records, std::span<const double> grid, const CurveOptions& options) {
  check_grid(grid);
  CurveEstimate out;
  const auto order = sorted_order(records);

  // Assign each usable record to its grid point, in canonical record order.
  std::vector<std::vector<std::size_t>> members(grid.size());
  for (const auto i : order) {
    const auto& rec = records[i];
    const auto g = find_temperature(grid, rec.temperature);
    if (!g) {
      ++out.diagnostics.off_grid;
      continue;
    }
    if (rec.steps.empty()) {
      ++out.diagnostics.skipped_without_steps;
      continue;
    }
    members[*g].push_back(i);
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (members[g].empty()) {
      throw Error(ErrorCode::MissingTemperatureData, "no records at temperature " + io::format_double(grid[g]));
    }
  }
  if (out.diagnostics.skipped_without_steps > 0) {
    out.diagnostics.warnings.push_back("skipped " + std::to_string(out.diagnostics.skipped_without_steps) +
                                       " record(s) without steps");
  }

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t k = 0; k < members[g].size(); ++k) jobs.emplace_back(g, k);
  }
  std::vector<std::vector<RecordScore>> scores(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) scores[g].resize(members[g].size());
  parallel_for(jobs.size(), options.workers, [&](std::size_t q) {
    const auto [g, k] = jobs[q];
    const auto& rec = records[members[g][k]];
    scores[g][k] = score_record(rec, rec.temperature, options.entropy);
  });
  out.diagnostics.records_used = jobs.size();
  out.curve = assemble_curve(grid, scores, options.weighting);
  return out;
}

CurveEstimate counterfactual_curve(const RecordSet& fixed_records, std::span<const double> grid,
                                   const CurveOptions& options) {
  check_grid(grid);
  CurveEstimate out;
  const auto order = sorted_order(fixed_records);
  std::vector<std::size_t> used;
  std::optional<double> source_t;
  for (const auto i : order) {
    const auto& rec = fixed_records[i];
    if (source_t && std::abs(*source_t - rec.temperature) > kTemperatureTolerance) {
      throw Error(ErrorCode::InvalidArgument, "counterfactual records must share one generation temperature");
    }
    source_t = rec.temperature;
    if (rec.steps.empty()) {
      ++out.diagnostics.skipped_without_steps;
      continue;
    }
    used.push_back(i);
  }
  if (used.empty()) {
    throw Error(ErrorCode::MissingTemperatureData, "no fixed trajectories with steps to re-score");
  }
  if (out.diagnostics.skipped_without_steps > 0) {
    out.diagnostics.warnings.push_back("skipped " + std::to_string(out.diagnostics.skipped_without_steps) +
                                       " record(s) without steps");
  }

  std::vector<std::vector<RecordScore>> scores(grid.size(), std::vector<RecordScore>(used.size()));
  parallel_for(grid.size() * used.size(), options.workers, [&](std::size_t q) {
    const auto g = q / used.size();
    const auto k = q % used.size();
    scores[g][k] = score_record(fixed_records[used[k]], grid[g], options.entropy);
  });
  out.diagnostics.records_used = used.size();
  out.curve = assemble_curve(grid, scores, options.weighting);
  return out;
}

Eigen::ArrayXd log_curve(const EntropyCurve& curve, std::size_t smoothing_window) {
  if (smoothing_window == 0 || smoothing_window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "smoothing window must be a positive odd integer");
  }
  return smooth(curve.mean_entropy.max(kLogFloor).log(), smoothing_window);
}

Eigen::ArrayXd log_second_differences(const EntropyCurve& curve, std::size_t smoothing_window) {
  const auto n = curve.size();
  if (n < 3) throw Error(ErrorCode::CurveTooShort, "need >= 3 curve points, got " + std::to_string(n));
  const Eigen::ArrayXd ell = log_curve(curve, smoothing_window);
  return ell.tail(n - 2) - 2.0 * ell.segment(1, n - 2) + ell.head(n - 2);
}

TurningPoint find_turning_point(const EntropyCurve& curve, std::size_t smoothing_window, double zero_tol) {
  TurningPoint tp;
  tp.second_differences = log_second_differences(curve, smoothing_window);
  const auto& d2 = tp.second_differences;
  for (Eigen::Index k = 0; k < d2.size(); ++k) {
    if (d2[k] > zero_tol && (k == 0 || d2[k - 1] <= zero_tol)) {
      tp.index = static_cast<std::size_t>(k) + 1;
      return tp;
    }
  }
  throw Error(ErrorCode::NoTurningPoint, "log-entropy curve never turns from concave to convex");
}

TurnResult select_temperature(const EntropyCurve& curve, Aggregation aggregation, const SelectOptions& options) {
  curve.validate();
  TurnResult r;
  TurningPoint tp;
  try {
    tp = find_turning_point(curve, options.smoothing_window, options.zero_tol);
    r.smoothing_window = options.smoothing_window;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoTurningPoint || options.retry_window == 0 ||
        options.retry_window == options.smoothing_window) {
      throw;
    }
    tp = find_turning_point(curve, options.retry_window, options.zero_tol);
    r.fallback_used = true;
    r.smoothing_window = options.retry_window;
  }
  r.entp_index = tp.index;
  r.entp_temperature = curve.temperature[static_cast<Eigen::Index>(tp.index)];
  r.beta = adaptation_beta(aggregation);
  r.second_differences.assign(tp.second_differences.data(),
                              tp.second_differences.data() + tp.second_differences.size());

  const double lo = curve.grid_start();
  const double hi = options.t_max.value_or(curve.temperature[curve.size() - 1]);
  double predicted = r.beta == 0.0 ? r.entp_temperature : round_temperature(r.entp_temperature + r.beta);
  if (predicted > hi + kTemperatureTolerance || predicted < lo - kTemperatureTolerance) r.clamped = true;
  r.predicted_temperature = std::clamp(predicted, lo, hi);
  return r;
}

std::string turn_result_to_json(const TurnResult& r) {
  nlohmann::ordered_json j;
  j["entp_index"] = r.entp_index;
  j["entp_temperature"] = r.entp_temperature;
  j["beta"] = r.beta;
  j["predicted_temperature"] = r.predicted_temperature;
  j["second_differences"] = r.second_differences;
  j["fallback_used"] = r.fallback_used;
  j["clamped"] = r.clamped;
  j["smoothing_window"] = r.smoothing_window;
  return j.dump(2) + "\n";
}

std::vector<StabilityRow> curve_stability_report(const RecordSet& records, std::span<const double> grid,
                                                 std::span<const std::size_t> sample_sizes,
                                                 const StabilityOptions& options) {
  check_grid(grid);
  if (options.resamples == 0) throw Error(ErrorCode::InvalidArgument, "resamples must be >= 1");

  // Scores per record are independent of the subsample, so compute once.
  const auto order = sorted_order(records);
  std::vector<std::vector<std::size_t>> members(grid.size());
  for (const auto i : order) {
    const auto g = find_temperature(grid, records[i].temperature);
    if (g && !records[i].steps.empty()) members[*g].push_back(i);
  }
  std::vector<std::vector<RecordScore>> pool(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    pool[g].resize(members[g].size());
    parallel_for(members[g].size(), options.curve.workers, [&](std::size_t k) {
      const auto& rec = records[members[g][k]];
      pool[g][k] = score_record(rec, rec.temperature, options.curve.entropy);
    });
  }

  std::vector<StabilityRow> rows;
  for (std::size_t si = 0; si < sample_sizes.size(); ++si) {
    const auto n = sample_sizes[si];
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be >= 1");
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (pool[g].size() < n) {
        throw Error(ErrorCode::SampleSizeTooLarge, "sample size " + std::to_string(n) + " exceeds the " +
                                                       std::to_string(pool[g].size()) + " record(s) at temperature " +
                                                       io::format_double(grid[g]));
      }
    }
    const auto grid_n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd means(static_cast<Eigen::Index>(options.resamples), grid_n);
    std::vector<std::optional<double>> predictions(options.resamples);
    for (std::size_t r = 0; r < options.resamples; ++r) {
      std::vector<std::vector<RecordScore>> subset(grid.size());
      for (std::size_t g = 0; g < grid.size(); ++g) {
        Stream rng(options.seed, {stream_tag::kStability, n, r, g});
        std::vector<std::size_t> idx(pool[g].size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng.engine());
        idx.resize(n);
        std::sort(idx.begin(), idx.end());
        for (const auto k : idx) subset[g].push_back(pool[g][k]);
      }
      const auto curve = assemble_curve(grid, subset, options.curve.weighting);
      means.row(static_cast<Eigen::Index>(r)) = curve.mean_entropy.matrix().transpose();
      try {
        predictions[r] = select_temperature(curve, options.aggregation, options.select).predicted_temperature;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoTurningPoint) throw;
      }
    }

    StabilityRow row;
    row.sample_size = n;
    row.resamples = options.resamples;
    double var_sum = 0.0;
    for (Eigen::Index g = 0; g < grid_n; ++g) var_sum += shifted_variance(means.col(g));
    row.mean_entropy_variance = var_sum / static_cast<double>(grid_n);
    std::vector<double> ok;
    for (const auto& p : predictions) {
      if (p) ok.push_back(*p);
    }
    row.failures = options.resamples - ok.size();
    if (!ok.empty()) {
      const Eigen::Map<const Eigen::ArrayXd> pv(ok.data(), static_cast<Eigen::Index>(ok.size()));
      row.prediction_mean = pv.mean();
      row.prediction_variance = shifted_variance(pv);
      row.prediction_spread = pv.maxCoeff() - pv.minCoeff();
    }
    rows.push_back(row);
  }
  return rows;
}

std::string stability_to_csv(std::span<const StabilityRow> rows) {
  std::string out =
      "sample_size,resamples,mean_entropy_variance,prediction_variance,prediction_spread,prediction_mean,failures\n";
  for (const auto& r : rows) {
    out += std::to_string(r.sample_size) + ',' + std::to_string(r.resamples) + ',' +
           io::format_double(r.mean_entropy_variance) + ',' + io::format_double(r.prediction_variance) + ',' +
           io::format_double(r.prediction_spread) + ',' + io::format_double(r.prediction_mean) + ',' +
           std::to_string(r.failures) + '\n';
  }
  return out;
}

}  // namespace turnpoint
