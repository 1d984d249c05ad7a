// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

// Client for an HTTP completions endpoint that returns per-token
// log-probabilities (request {model, prompt, temperature, max_tokens, n,
// logprobs}; response choices[].logprobs.{tokens, token_logprobs,
// top_logprobs}). Responses become SampleRecords with base-temperature logits.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "turnpoint/records.hpp"

namespace turnpoint {

struct EndpointConfig {
  /// scheme://host[:port][/prefix]; requests go to <prefix>/v1/completions.
  std::string base_url;
  std::string model;
  /// Environment variable holding the bearer token; unset means no header.
  std::string api_key_env = "TURNPOINT_API_KEY";
  double timeout_seconds = 120.0;
  unsigned max_in_flight = 4;
  unsigned max_tries = 5;
  double backoff_base_seconds = 1.0;
  double backoff_factor = 2.0;
  /// The server reports logprobs of the untempered distribution, so no
  /// rescaling by T is applied.
  bool server_reports_base_logprobs = false;
};

struct SamplingParams {
  std::size_t max_tokens = 1024;
  std::optional<std::size_t> top_k;
  std::optional<double> top_p;
  std::size_t n_per_temperature = 1;
  std::vector<double> temperatures;
  std::size_t logprob_depth = 20;

  /// Throws InvalidConfig.
  void validate() const;
};

struct Prompt {
  std::string problem_id;
  std::string text;
};

using AnswerExtractor = std::function<std::optional<std::string>(std::string_view completion)>;

/// Contents of the last \boxed{...}, else the last non-blank line.
std::optional<std::string> extract_answer(std::string_view completion);

struct FetchResult {
  RecordSet records;
  std::vector<std::string> warnings;
  std::size_t requests = 0;
};

/// One request per (prompt, temperature) asking for n_per_temperature
/// completions. Transport errors, 429 and 5xx are retried with exponential
/// backoff; exhausting the tries or any other status throws FetchFailed.
/// Records come back sorted by (problem_id, temperature, sample_index).
FetchResult fetch_samples(const EndpointConfig& endpoint, const std::vector<Prompt>& prompts,
                          const SamplingParams& params, const AnswerExtractor& extractor = extract_answer);

/// Reads prompts from JSONL lines {"problem_id": ..., "prompt": ...}.
std::vector<Prompt> parse_prompts(const std::string& text);

}  // namespace turnpoint
