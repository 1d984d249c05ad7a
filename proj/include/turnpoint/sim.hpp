// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

// Error-propagation process model of temperature-driven quality collapse.
//
// Each decoding step emits a proper token with probability 1 - x_t or one of
// N1 low-logit improper tokens with probability x_t. After an improper token
// the error rate rises to 1 - (1 - x)^alpha; after a proper one it decays to
// max(x^alpha, x_init). x_init is the improper mass of the two-block softmax
// at temperature T.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "turnpoint/curve.hpp"
#include "turnpoint/grid.hpp"
#include "turnpoint/records.hpp"
#include "turnpoint/rng.hpp"

namespace turnpoint::sim {

struct SimConfig {
  std::size_t n_proper = 10;        // N0
  std::size_t n_improper = 30000;   // N1
  double proper_logit_mean = 0.0;   // L0
  double proper_logit_sigma = 1.0;  // sigma0
  double improper_logit = -10.0;    // L1
  std::size_t steps = 512;          // K
  double alpha = 2.0;
  std::size_t trials = 500;
  std::uint64_t seed = 0;
  TemperatureGrid grid{};
  /// Use softmax(l0) without 1/T inside the proper block.
  bool literal_proper_softmax = false;
  unsigned workers = 0;

  /// Throws InvalidConfig on violated invariants; returns warnings (N0 >= N1).
  std::vector<std::string> validate() const;
};

enum class Outcome : std::uint8_t { Proper, Improper };

struct SimStep {
  double error_rate = 0.0;
  Outcome outcome = Outcome::Proper;
  double entropy = 0.0;
};

struct SimTrace {
  double x_init = 0.0;
  std::vector<SimStep> steps;

  double mean_entropy() const;
  std::size_t improper_count() const;
};

/// Proper-block logits of one trial: N0 draws from Normal(L0, sigma0^2).
Eigen::ArrayXd draw_proper_logits(const SimConfig& config, Stream& rng);

/// Proper logits for `trial_index`, shared by every grid temperature.
Eigen::ArrayXd trial_proper_logits(const SimConfig& config, std::size_t trial_index);

/// N1 exp(L1/T) / (sum_j exp(l0_j/T) + N1 exp(L1/T)), computed stably.
/// Throws InvalidTemperature for T <= 0. Underflows to 0 as T -> 0+.
double initial_error_rate(const Eigen::ArrayXd& proper_logits, const SimConfig& config, double temperature);

double update_error_rate(double x, Outcome outcome, double alpha, double x_init);

struct StepDistribution {
  Eigen::ArrayXd proper;         // (1 - x) softmax(l0 / T)
  double improper_each = 0.0;    // x / N1
};

StepDistribution step_distribution(double x, const Eigen::ArrayXd& proper_logits, const SimConfig& config,
                                   double temperature);

/// Closed form over the improper block: x (ln N1 - ln x).
double step_entropy(double x, const Eigen::ArrayXd& proper_logits, const SimConfig& config, double temperature);

/// Runs the process with outcomes supplied by `draw(x_t)` (true = improper).
SimTrace run_process(const Eigen::ArrayXd& proper_logits, const SimConfig& config, double temperature,
                     std::size_t steps, const std::function<bool(double)>& draw);

/// One seeded trial; the outcome stream is keyed by (seed, grid_index, trial).
SimTrace run_trial(const SimConfig& config, double temperature, std::size_t grid_index, std::size_t trial_index);

struct SimCurves {
  EntropyCurve curve;
  Eigen::ArrayXd improper_fraction;
};

/// Mean (over trials) of each trace's mean step entropy, and the fraction
/// of improper outcomes, at every grid temperature.
SimCurves simulate_curves(const SimConfig& config);

std::string sim_curves_to_csv(const SimCurves& curves);

// ---------------------------------------------------------------------------
// Record export and a synthetic answer task

struct ExportOptions {
  std::size_t records = 8;
  std::size_t steps = 32;
  /// Entries kept per step (the most probable ones). 0 keeps all N0 + N1.
  std::size_t depth = 1000;
  std::string problem_prefix = "sim";
};

/// Exports trials as SampleRecords generated at `temperature`. Trial r uses
/// the same streams as run_trial(config, temperature, grid_index, r), so
/// entropy computed from the records reproduces the simulator's own.
/// Stored logits are T ln p, which rescaling at T maps back to p.
RecordSet export_records(const SimConfig& config, double temperature, std::size_t grid_index,
                         const ExportOptions& options);

/// One synthetic question: samples answer "ok" when no improper outcome
/// occurred, otherwise "err-<i>" with i the first improper step.
/// correct = (answer == "ok"), score = fraction of proper steps.
RecordSet synth_task_samples(const SimConfig& config, double temperature, std::size_t n_samples,
                             std::size_t steps, std::uint64_t seed, std::size_t problem_index = 0);

/// Reads a SimConfig from JSON; absent fields keep their defaults.
SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& config);

}  // namespace turnpoint::sim
