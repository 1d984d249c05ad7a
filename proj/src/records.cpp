// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/records.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "turnpoint/io.hpp"

namespace turnpoint {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

double finite_number(const ojson& v, const char* field) {
  if (!v.is_number()) bad(std::string("field '") + field + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(std::string("field '") + field + "' must be finite");
  return d;
}

StepRecord step_from_json(const ojson& j) {
  if (!j.is_object()) bad("step must be an object");
  if (!j.contains("chosen") || !j["chosen"].is_string()) bad("step.chosen must be a string");
  if (!j.contains("topk") || !j["topk"].is_array()) bad("step.topk must be an array");
  const auto& topk = j["topk"];
  if (topk.empty()) bad("step.topk must be nonempty");
  TokenList tokens;
  tokens.reserve(topk.size());
  Eigen::ArrayXd logits(static_cast<Eigen::Index>(topk.size()));
  Eigen::Index i = 0;
  for (const auto& e : topk) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string()) bad("topk entries must be [token, logit]");
    if (!e[1].is_number()) throw Error(ErrorCode::InvalidDistribution, "non-finite or missing logit");
    const double l = e[1].get<double>();
    if (!std::isfinite(l)) throw Error(ErrorCode::InvalidDistribution, "non-finite logit");
    tokens.push_back(e[0].get<std::string>());
    logits[i++] = l;
  }
  return StepRecord{j["chosen"].get<std::string>(), TokenDist(std::move(tokens), std::move(logits))};
}

}  // namespace

SampleRecord record_from_json_line(const std::string& line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("record must be a JSON object");
  SampleRecord r;
  if (!j.contains("problem_id") || !j["problem_id"].is_string()) bad("problem_id must be a string");
  r.problem_id = j["problem_id"].get<std::string>();
  if (!j.contains("temperature")) bad("temperature is required");
  r.temperature = finite_number(j["temperature"], "temperature");
  if (!(r.temperature > 0.0)) throw Error(ErrorCode::InvalidTemperature, "temperature must be > 0");
  if (!j.contains("sample_index") || !j["sample_index"].is_number_integer()) bad("sample_index must be an integer");
  r.sample_index = j["sample_index"].get<long long>();
  if (j.contains("steps") && !j["steps"].is_null()) {
    if (!j["steps"].is_array()) bad("steps must be an array");
    r.steps.reserve(j["steps"].size());
    for (const auto& s : j["steps"]) r.steps.push_back(step_from_json(s));
  }
  if (j.contains("answer") && !j["answer"].is_null()) {
    if (!j["answer"].is_string()) bad("answer must be a string");
    r.answer = j["answer"].get<std::string>();
  }
  if (j.contains("correct") && !j["correct"].is_null()) {
    if (!j["correct"].is_boolean()) bad("correct must be a boolean");
    r.correct = j["correct"].get<bool>();
  }
  if (j.contains("score") && !j["score"].is_null()) r.score = finite_number(j["score"], "score");
  if (j.contains("meta") && !j["meta"].is_null()) {
    if (!j["meta"].is_object()) bad("meta must be an object");
    for (const auto& [k, v] : j["meta"].items()) {
      if (!v.is_string()) bad("meta values must be strings");
      r.meta.emplace(k, v.get<std::string>());
    }
  }
  return r;
}

std::string record_to_json_line(const SampleRecord& r) {
  ojson j;
  j["problem_id"] = r.problem_id;
  j["temperature"] = r.temperature;
  j["sample_index"] = r.sample_index;
  ojson steps = ojson::array();
  for (const auto& s : r.steps) {
    ojson topk = ojson::array();
    for (std::size_t i = 0; i < s.topk.size(); ++i) {
      topk.push_back(ojson::array({s.topk.token(i), s.topk.logits()[static_cast<Eigen::Index>(i)]}));
    }
    steps.push_back(ojson{{"chosen", s.chosen}, {"topk", std::move(topk)}});
  }
  j["steps"] = std::move(steps);
  j["answer"] = r.answer ? ojson(*r.answer) : ojson(nullptr);
  j["correct"] = r.correct ? ojson(*r.correct) : ojson(nullptr);
  j["score"] = r.score ? ojson(*r.score) : ojson(nullptr);
  ojson meta = ojson::object();
  for (const auto& [k, v] : r.meta) meta[k] = v;
  j["meta"] = std::move(meta);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

ReadReport parse_records(const std::string& text, bool strict) {
  ReadReport report;
  std::set<std::tuple<std::string, double, long long>> seen;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++line_no;
    const std::string line(io::trim(std::string_view(text).substr(pos, nl - pos)));
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      auto rec = record_from_json_line(line);
      if (!seen.emplace(rec.problem_id, rec.temperature, rec.sample_index).second) {
        throw Error(ErrorCode::RejectedDuplicate, "duplicate (problem_id, temperature, sample_index) = (" +
                                                      rec.problem_id + ", " + io::format_double(rec.temperature) +
                                                      ", " + std::to_string(rec.sample_index) + ")");
      }
      report.records.push_back(std::move(rec));
    } catch (const Error& e) {
      if (strict) throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
      report.rejected.push_back({line_no, e.code(), e.what()});
    }
  }
  return report;
}

ReadReport read_records(const std::filesystem::path& path, bool strict) {
  return parse_records(io::read_file(path), strict);
}

void sort_records(RecordSet& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const SampleRecord& a, const SampleRecord& b) { return a.key() < b.key(); });
}

std::string records_to_jsonl(const RecordSet& records) {
  std::vector<const SampleRecord*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->key() < b->key(); });
  std::string out;
  for (const auto* r : order) {
    out += record_to_json_line(*r);
    out += '\n';
  }
  return out;
}

void write_records(const RecordSet& records, const std::filesystem::path& path) {
  io::write_file_atomic(path, records_to_jsonl(records));
}

}  // namespace turnpoint
