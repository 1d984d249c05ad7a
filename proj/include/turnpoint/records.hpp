// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

// Canonical per-token log-probability records, one JSON object per line:
//
//   {"problem_id":"q1","temperature":0.7,"sample_index":0,
//    "steps":[{"chosen":"4","topk":[["4",-0.1],["5",-2.3]]}],
//    "answer":"4","correct":true,"score":null,"meta":{"model":"m"}}
//
// Logits are base-temperature (T = 1) scores, so one record supports both
// trajectory-mode and counterfactual-mode entropy.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "turnpoint/dist.hpp"
#include "turnpoint/error.hpp"

namespace turnpoint {

struct StepRecord {
  std::string chosen;
  TokenDist topk;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SampleRecord {
  std::string problem_id;
  double temperature = 1.0;
  long long sample_index = 0;
  std::vector<StepRecord> steps;
  std::optional<std::string> answer;
  std::optional<bool> correct;
  std::optional<double> score;
  std::map<std::string, std::string> meta;

  auto key() const { return std::tie(problem_id, temperature, sample_index); }
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

using RecordSet = std::vector<SampleRecord>;

struct RejectedLine {
  std::size_t line = 0;  // 1-based
  ErrorCode code = ErrorCode::ParseError;
  std::string message;
};

struct ReadReport {
  RecordSet records;
  std::vector<RejectedLine> rejected;
};

/// Parses one JSONL line; throws ParseError / InvalidDistribution /
/// InvalidTemperature on any invariant violation.
SampleRecord record_from_json_line(const std::string& line);
std::string record_to_json_line(const SampleRecord& record);

/// Loads a JSONL record file. Bad lines and duplicate (problem_id,
/// temperature, sample_index) keys are reported, not loaded. With `strict`
/// the first problem is thrown instead.
ReadReport read_records(const std::filesystem::path& path, bool strict = false);
ReadReport parse_records(const std::string& text, bool strict = false);

/// Writes records sorted by (problem_id, temperature, sample_index).
void write_records(const RecordSet& records, const std::filesystem::path& path);
std::string records_to_jsonl(const RecordSet& records);

/// Stable order by (problem_id, temperature, sample_index).
void sort_records(RecordSet& records);

}  // namespace turnpoint
