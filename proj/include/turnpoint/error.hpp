// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace turnpoint {

enum class ErrorCode {
  InvalidDistribution,
  InvalidTemperature,
  InvalidArgument,
  InvalidConfig,
  MissingTemperatureData,
  CurveTooShort,
  NoTurningPoint,
  SampleSizeTooLarge,
  EmptySampleSet,
  MissingReward,
  EmptyInput,
  PairedInputMismatch,
  DegenerateVariance,
  RejectedDuplicate,
  ParseError,
  IoError,
  FetchFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// All library failures surface as this exception; `code()` identifies the
/// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace turnpoint
