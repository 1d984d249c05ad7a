// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/grid.hpp"

#include <string>

#include "turnpoint/error.hpp"

namespace turnpoint {

void TemperatureGrid::validate() const {
  if (!(start > 0.0) || !(step > 0.0) || !(max >= start) || !std::isfinite(max)) {
    throw Error(ErrorCode::InvalidConfig, "grid needs 0 < start <= max and step > 0 (start=" +
                                              std::to_string(start) + ", step=" + std::to_string(step) +
                                              ", max=" + std::to_string(max) + ")");
  }
}

std::vector<double> TemperatureGrid::points() const {
  validate();
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = round_temperature(start + static_cast<double>(k) * step);
    if (t > max + kTemperatureTolerance) break;
    out.push_back(t);
  }
  return out;
}

std::optional<std::size_t> find_temperature(std::span<const double> points, double t) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(points[i] - t) <= kTemperatureTolerance) return i;
  }
  return std::nullopt;
}

}  // namespace turnpoint
