// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/curve.hpp"

#include <cmath>

#include "turnpoint/error.hpp"
#include "turnpoint/grid.hpp"
#include "turnpoint/io.hpp"

namespace turnpoint {

void EntropyCurve::validate() const {
  const auto n = size();
  if (mean_entropy.size() != n || variance.size() != n || n_samples.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::InvalidArgument, "curve columns differ in length");
  }
  if (n == 0) throw Error(ErrorCode::EmptyInput, "empty curve");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(temperature[j] > 0.0)) throw Error(ErrorCode::InvalidArgument, "curve temperature must be > 0");
    if (n_samples[static_cast<std::size_t>(j)] == 0) {
      throw Error(ErrorCode::InvalidArgument, "curve point without samples");
    }
    if (!(mean_entropy[j] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative mean entropy");
  }
  if (n > 1) {
    const double step = grid_step();
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "curve temperatures not increasing");
    for (Eigen::Index j = 1; j < n; ++j) {
      if (std::abs((temperature[j] - temperature[j - 1]) - step) > kTemperatureTolerance) {
        throw Error(ErrorCode::InvalidArgument, "curve grid is not uniform");
      }
    }
  }
}

std::string curve_to_csv(const EntropyCurve& curve) {
  std::string out = "temperature,mean_entropy,n_samples,variance\n";
  for (Eigen::Index j = 0; j < curve.size(); ++j) {
    out += io::format_double(curve.temperature[j]) + ',' + io::format_double(curve.mean_entropy[j]) + ',' +
           std::to_string(curve.n_samples[static_cast<std::size_t>(j)]) + ',' +
           io::format_double(curve.variance[j]) + '\n';
  }
  return out;
}

EntropyCurve curve_from_csv(const std::string& text) {
  const auto rows = io::parse_csv(text);
  if (rows.empty() || rows.front() != std::vector<std::string>{"temperature", "mean_entropy", "n_samples", "variance"}) {
    throw Error(ErrorCode::ParseError, "curve CSV must start with header temperature,mean_entropy,n_samples,variance");
  }
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  EntropyCurve c;
  c.temperature.resize(n);
  c.mean_entropy.resize(n);
  c.variance.resize(n);
  c.n_samples.resize(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& r = rows[static_cast<std::size_t>(j) + 1];
    if (r.size() != 4) throw Error(ErrorCode::ParseError, "curve CSV row " + std::to_string(j + 2) + " needs 4 fields");
    c.temperature[j] = io::parse_double(r[0]);
    c.mean_entropy[j] = io::parse_double(r[1]);
    const auto count = io::parse_integer(r[2]);
    if (count < 0) throw Error(ErrorCode::ParseError, "negative n_samples");
    c.n_samples[static_cast<std::size_t>(j)] = static_cast<std::size_t>(count);
    c.variance[j] = io::parse_double(r[3]);
  }
  c.validate();
  return c;
}

}  // namespace turnpoint
