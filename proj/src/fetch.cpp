// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/fetch.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "turnpoint/error.hpp"
#include "turnpoint/grid.hpp"
#include "turnpoint/io.hpp"
#include "turnpoint/parallel.hpp"

namespace turnpoint {

namespace {

using json = nlohmann::ordered_json;

struct Target {
  std::string origin;  // scheme://host:port
  std::string path;
};

Target split_url(const std::string& base) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidConfig, "endpoint needs a scheme: " + base);
  const auto slash = base.find('/', scheme_end + 3);
  Target t;
  t.origin = base.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : base.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  t.path = prefix + "/v1/completions";
  return t;
}

struct Job {
  std::size_t prompt = 0;
  double temperature = 0.0;
};

struct JobOutput {
  RecordSet records;
  std::vector<std::string> warnings;
};

bool retryable(int status) { return status == 429 || status >= 500; }

// Parses one choice; returns nullopt (with a warning) when it cannot form a
// valid record.
std::optional<SampleRecord> choice_to_record(const json& choice, const Prompt& prompt, double temperature,
                                             std::size_t fallback_index, const EndpointConfig& endpoint,
                                             const SamplingParams& params, const std::string& request_id,
                                             const AnswerExtractor& extractor, std::vector<std::string>& warnings) {
  const auto index = choice.contains("index") && choice["index"].is_number_integer()
                         ? choice["index"].get<long long>()
                         : static_cast<long long>(fallback_index);
  const std::string where = prompt.problem_id + " T=" + io::format_double(temperature) + " #" + std::to_string(index);
  if (!choice.contains("logprobs") || !choice["logprobs"].is_object()) {
    warnings.push_back(where + ": no logprobs, dropped");
    return std::nullopt;
  }
  const auto& lp = choice["logprobs"];
  if (!lp.contains("tokens") || !lp.contains("token_logprobs") || !lp["tokens"].is_array() ||
      !lp["token_logprobs"].is_array() || lp["tokens"].size() != lp["token_logprobs"].size()) {
    warnings.push_back(where + ": malformed logprobs, dropped");
    return std::nullopt;
  }
  const double scale = endpoint.server_reports_base_logprobs ? 1.0 : temperature;
  SampleRecord rec;
  rec.problem_id = prompt.problem_id;
  rec.temperature = temperature;
  rec.sample_index = index;
  std::size_t shallow = 0;
  const auto& tokens = lp["tokens"];
  const auto& chosen_lp = lp["token_logprobs"];
  const json empty = json::object();
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    const auto& top = lp.contains("top_logprobs") && lp["top_logprobs"].is_array() && s < lp["top_logprobs"].size() &&
                              lp["top_logprobs"][s].is_object()
                          ? lp["top_logprobs"][s]
                          : empty;
    std::vector<std::pair<std::string, double>> entries;
    for (const auto& [tok, v] : top.items()) {
      if (!v.is_number()) continue;
      entries.emplace_back(tok, v.get<double>());
    }
    if (entries.size() < params.logprob_depth) ++shallow;
    const std::string chosen = tokens[s].get<std::string>();
    const bool present =
        std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == chosen; });
    if (!present) {
      if (!chosen_lp[s].is_number()) {
        warnings.push_back(where + ": chosen token without logprob at step " + std::to_string(s) + ", dropped");
        return std::nullopt;
      }
      entries.emplace_back(chosen, chosen_lp[s].get<double>());
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    TokenList toks;
    Eigen::ArrayXd logits(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
      toks.push_back(entries[i].first);
      logits[static_cast<Eigen::Index>(i)] = scale * entries[i].second;
    }
    try {
      rec.steps.push_back({chosen, TokenDist(std::move(toks), std::move(logits))});
    } catch (const Error& e) {
      warnings.push_back(where + ": step " + std::to_string(s) + " invalid (" + e.what() + "), dropped");
      return std::nullopt;
    }
  }
  if (shallow > 0)
    warnings.push_back(where + ": " + std::to_string(shallow) + " step(s) with fewer than " +
                       std::to_string(params.logprob_depth) + " alternatives");
  const std::string text = choice.contains("text") && choice["text"].is_string() ? choice["text"].get<std::string>() : "";
  if (extractor) rec.answer = extractor(text);
  rec.meta["model"] = endpoint.model;
  rec.meta["request_id"] = request_id;
  rec.meta["logprob_depth"] = std::to_string(params.logprob_depth);
  return rec;
}

}  // namespace

void SamplingParams::validate() const {
  if (max_tokens < 1) throw Error(ErrorCode::InvalidConfig, "max_tokens must be >= 1");
  if (logprob_depth < 1) throw Error(ErrorCode::InvalidConfig, "logprob_depth must be >= 1");
  for (const double t : temperatures) {
    if (!(t > 0.0) || !std::isfinite(t))
      throw Error(ErrorCode::InvalidConfig, "temperature must be > 0, got " + io::format_double(t));
  }
  if (top_p && !(*top_p > 0.0 && *top_p <= 1.0)) throw Error(ErrorCode::InvalidConfig, "top_p must be in (0, 1]");
}

std::optional<std::string> extract_answer(std::string_view text) {
  const std::string_view tag = "\\boxed{";
  const auto pos = text.rfind(tag);
  if (pos != std::string_view::npos) {
    int depth = 1;
    const auto start = pos + tag.size();
    for (auto i = start; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}' && --depth == 0) return std::string(text.substr(start, i - start));
    }
  }
  std::optional<std::string> last;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    const auto t = io::trim(line);
    if (!t.empty()) last = std::string(t);
  }
  return last;
}

std::vector<Prompt> parse_prompts(const std::string& text) {
  std::vector<Prompt> out;
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (io::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("problem_id").get<std::string>(), j.at("prompt").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "prompt line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

FetchResult fetch_samples(const EndpointConfig& endpoint, const std::vector<Prompt>& prompts,
                          const SamplingParams& params, const AnswerExtractor& extractor) {
  params.validate();
  FetchResult result;
  if (params.n_per_temperature == 0 || prompts.empty() || params.temperatures.empty()) return result;
  if (endpoint.model.empty()) throw Error(ErrorCode::InvalidConfig, "endpoint model is empty");
  if (endpoint.max_tries < 1) throw Error(ErrorCode::InvalidConfig, "max_tries must be >= 1");
  const Target target = split_url(endpoint.base_url);

  std::string api_key;
  if (!endpoint.api_key_env.empty()) {
    if (const char* k = std::getenv(endpoint.api_key_env.c_str())) api_key = k;
  }

  std::vector<Job> jobs;
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    for (const double t : params.temperatures) jobs.push_back({p, round_temperature(t)});
  }
  std::vector<JobOutput> outputs(jobs.size());

  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(endpoint.timeout_seconds));
  parallel_for(jobs.size(), std::max(1u, endpoint.max_in_flight), [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& prompt = prompts[job.prompt];
    json body;
    body["model"] = endpoint.model;
    body["prompt"] = prompt.text;
    body["temperature"] = job.temperature;
    body["max_tokens"] = params.max_tokens;
    body["n"] = params.n_per_temperature;
    body["logprobs"] = params.logprob_depth;
    if (params.top_k) body["top_k"] = *params.top_k;
    if (params.top_p) body["top_p"] = *params.top_p;
    const std::string payload = body.dump();

    httplib::Client client(target.origin);
    if (!client.is_valid()) throw Error(ErrorCode::InvalidConfig, "unsupported endpoint: " + endpoint.base_url);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    std::string last_error;
    std::string response_body;
    bool ok = false;
    for (unsigned attempt = 0; attempt < endpoint.max_tries; ++attempt) {
      if (attempt > 0) {
        const double wait = endpoint.backoff_base_seconds * std::pow(endpoint.backoff_factor, attempt - 1);
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      }
      auto res = client.Post(target.path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) {
        response_body = res->body;
        ok = true;
        break;
      }
      last_error = "HTTP " + std::to_string(res->status);
      if (!retryable(res->status)) break;
    }
    if (!ok)
      throw Error(ErrorCode::FetchFailed, prompt.problem_id + " at T=" + io::format_double(job.temperature) + ": " +
                                              last_error);

    json reply;
    try {
      reply = json::parse(response_body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::FetchFailed, "unparseable response for " + prompt.problem_id + ": " + e.what());
    }
    if (!reply.contains("choices") || !reply["choices"].is_array())
      throw Error(ErrorCode::FetchFailed, "response for " + prompt.problem_id + " has no choices");
    const std::string request_id = reply.contains("id") && reply["id"].is_string() ? reply["id"].get<std::string>() : "";
    auto& out = outputs[j];
    if (reply["choices"].size() < params.n_per_temperature)
      out.warnings.push_back(prompt.problem_id + " T=" + io::format_double(job.temperature) + ": " +
                             std::to_string(reply["choices"].size()) + " of " +
                             std::to_string(params.n_per_temperature) + " completions returned");
    std::size_t k = 0;
    for (const auto& choice : reply["choices"]) {
      auto rec = choice_to_record(choice, prompt, job.temperature, k++, endpoint, params, request_id, extractor,
                                  out.warnings);
      if (rec) out.records.push_back(std::move(*rec));
    }
  });

  result.requests = jobs.size();
  for (auto& o : outputs) {
    for (auto& r : o.records) result.records.push_back(std::move(r));
    for (auto& w : o.warnings) result.warnings.push_back(std::move(w));
  }
  sort_records(result.records);
  for (std::size_t i = 1; i < result.records.size(); ++i) {
    if (result.records[i].key() == result.records[i - 1].key())
      throw Error(ErrorCode::FetchFailed, "server returned duplicate choice index for " + result.records[i].problem_id);
  }
  return result;
}

}  // namespace turnpoint
