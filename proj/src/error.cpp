// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/error.hpp"

namespace turnpoint {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidTemperature: return "InvalidTemperature";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingTemperatureData: return "MissingTemperatureData";
    case ErrorCode::CurveTooShort: return "CurveTooShort";
    case ErrorCode::NoTurningPoint: return "NoTurningPoint";
    case ErrorCode::SampleSizeTooLarge: return "SampleSizeTooLarge";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::MissingReward: return "MissingReward";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::PairedInputMismatch: return "PairedInputMismatch";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::RejectedDuplicate: return "RejectedDuplicate";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FetchFailed: return "FetchFailed";
  }
  return "Unknown";
}

}  // namespace turnpoint
