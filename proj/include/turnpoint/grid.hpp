// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace turnpoint {

/// Temperatures closer than this are the same grid point.
inline constexpr double kTemperatureTolerance = 1e-9;

/// Rounds to 1e-10 so that start + k*step prints as the decimal it means.
inline double round_temperature(double t) { return std::round(t * 1e10) / 1e10; }

/// Uniform temperature grid start, start+step, ..., <= max. The default is
/// 0.1..1.5 in steps of 0.1; T = 0 is never a grid point.
struct TemperatureGrid {
  double start = 0.1;
  double step = 0.1;
  double max = 1.5;

  /// Throws InvalidConfig unless 0 < start <= max and step > 0.
  void validate() const;
  std::vector<double> points() const;
  std::size_t size() const { return points().size(); }
};

/// Index of `t` among `points` within kTemperatureTolerance.
std::optional<std::size_t> find_temperature(std::span<const double> points, double t);

}  // namespace turnpoint
