// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace turnpoint {

/// Mean per-token entropy at each point of a uniform temperature grid.
struct EntropyCurve {
  Eigen::ArrayXd temperature;
  Eigen::ArrayXd mean_entropy;
  Eigen::ArrayXd variance;
  std::vector<std::size_t> n_samples;

  Eigen::Index size() const noexcept { return temperature.size(); }
  double grid_start() const { return temperature[0]; }
  double grid_step() const { return size() > 1 ? temperature[1] - temperature[0] : 0.0; }

  /// Throws InvalidArgument if the columns disagree in length, spacing is not
  /// uniform within 1e-9, any n_samples is 0, or any mean is negative.
  void validate() const;
};

/// CSV with header `temperature,mean_entropy,n_samples,variance`.
std::string curve_to_csv(const EntropyCurve& curve);
EntropyCurve curve_from_csv(const std::string& text);

}  // namespace turnpoint
