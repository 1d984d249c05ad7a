// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <optional>

#include "support/harness.hpp"
#include "turnpoint/fetch.hpp"

namespace turnpoint {
namespace {

using testing::MockCompletions;

EndpointConfig endpoint_for(const MockCompletions& mock) {
  EndpointConfig e;
  e.base_url = mock.url();
  e.model = "mock-model";
  e.api_key_env = "TURNPOINT_TEST_KEY";
  e.timeout_seconds = 10.0;
  e.backoff_base_seconds = 0.001;
  e.max_tries = 3;
  return e;
}

SamplingParams params_for(std::vector<double> temps, std::size_t n) {
  SamplingParams p;
  p.temperatures = std::move(temps);
  p.n_per_temperature = n;
  p.logprob_depth = 2;
  p.max_tokens = 8;
  return p;
}

const std::vector<Prompt> kPrompts{{"q1", "one plus three"}, {"q2", "two plus two"}};

TEST(Fetch, ZeroSamplesMakesNoRequests) {
  MockCompletions mock;
  const auto r = fetch_samples(endpoint_for(mock), kPrompts, params_for({0.5, 1.0}, 0));
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.requests, 0u);
  EXPECT_EQ(mock.requests(), 0);
}

TEST(Fetch, ConvertsLogprobsToBaseLogits) {
  MockCompletions mock;
  const auto r = fetch_samples(endpoint_for(mock), kPrompts, params_for({2.0, 0.5}, 3));
  EXPECT_EQ(mock.requests(), 4);
  ASSERT_EQ(r.records.size(), 12u);
  EXPECT_TRUE(r.warnings.empty());
  const auto& first = r.records.front();
  EXPECT_EQ(first.problem_id, "q1");
  EXPECT_EQ(first.temperature, 0.5);
  EXPECT_EQ(first.sample_index, 0);
  ASSERT_EQ(first.steps.size(), 2u);
  EXPECT_NEAR(first.steps[0].topk.logits()[0], -0.6931 * 0.5, 1e-12);
  EXPECT_EQ(first.answer, std::optional<std::string>("4"));
  EXPECT_EQ(r.records[1].answer, std::optional<std::string>("5"));
  EXPECT_EQ(first.meta.at("model"), "mock-model");
  EXPECT_EQ(first.meta.at("logprob_depth"), "2");
  EXPECT_EQ(first.meta.at("request_id").rfind("cmpl-one plus three-", 0), 0u);

  const auto& hot = r.records[3];
  EXPECT_EQ(hot.temperature, 2.0);
  EXPECT_NEAR(hot.steps[1].topk.logits()[1], -1.3862, 1e-12);
  EXPECT_EQ(hot.steps[1].chosen, "5");
  for (std::size_t i = 1; i < r.records.size(); ++i) EXPECT_LT(r.records[i - 1].key(), r.records[i].key());
}

TEST(Fetch, BaseLogprobSwitchSkipsRescaling) {
  MockCompletions mock;
  auto e = endpoint_for(mock);
  e.server_reports_base_logprobs = true;
  const auto r = fetch_samples(e, {kPrompts[0]}, params_for({2.0}, 1));
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_NEAR(r.records[0].steps[0].topk.logits()[0], -0.6931, 1e-12);
}

TEST(Fetch, MissingChosenTokenIsAddedAndShallowDepthWarns) {
  MockCompletions mock({.alternatives = 1});
  const auto r = fetch_samples(endpoint_for(mock), {kPrompts[0]}, params_for({1.0}, 1));
  ASSERT_EQ(r.records.size(), 1u);
  const auto& s = r.records[0].steps[1];
  EXPECT_EQ(s.chosen, "5");
  EXPECT_EQ(s.topk.size(), 2u);
  EXPECT_EQ(s.topk.tokens(), (TokenList{"4", "5"}));
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("fewer than 2"), std::string::npos);
}

TEST(Fetch, ShortReplyWarns) {
  MockCompletions mock({.max_choices = 2});
  const auto r = fetch_samples(endpoint_for(mock), {kPrompts[0]}, params_for({1.0}, 4));
  EXPECT_EQ(r.records.size(), 2u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("2 of 4"), std::string::npos);
}

TEST(Fetch, RetriesServerErrors) {
  MockCompletions mock({.fail_first = 2});
  const auto r = fetch_samples(endpoint_for(mock), {kPrompts[0]}, params_for({1.0}, 1));
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(mock.requests(), 3);
}

TEST(Fetch, ExhaustedTriesFail) {
  MockCompletions mock({.fail_first = 10});
  try {
    fetch_samples(endpoint_for(mock), {kPrompts[0]}, params_for({1.0}, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FetchFailed);
  }
  EXPECT_EQ(mock.requests(), 3);
}

TEST(Fetch, ClientErrorsAreNotRetried) {
  MockCompletions mock({.status_override = 404});
  try {
    fetch_samples(endpoint_for(mock), {kPrompts[0]}, params_for({1.0}, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FetchFailed);
    EXPECT_NE(std::string(e.what()).find("404"), std::string::npos);
  }
  EXPECT_EQ(mock.requests(), 1);
}

TEST(Fetch, UnreachableEndpointFails) {
  EndpointConfig e;
  e.base_url = "http://127.0.0.1:1";
  e.model = "m";
  e.max_tries = 2;
  e.backoff_base_seconds = 0.001;
  e.timeout_seconds = 2.0;
  try {
    fetch_samples(e, {kPrompts[0]}, params_for({1.0}, 1));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::FetchFailed);
  }
}

TEST(Fetch, BearerTokenComesFromEnvironment) {
  MockCompletions mock;
  ::setenv("TURNPOINT_TEST_KEY", "sekrit", 1);
  fetch_samples(endpoint_for(mock), {kPrompts[0]}, params_for({1.0}, 1));
  ::unsetenv("TURNPOINT_TEST_KEY");
  fetch_samples(endpoint_for(mock), {kPrompts[0]}, params_for({1.0}, 1));
  const auto auth = mock.auth_headers();
  ASSERT_EQ(auth.size(), 2u);
  EXPECT_EQ(auth[0], "Bearer sekrit");
  EXPECT_EQ(auth[1], "");
}

TEST(Fetch, ParamValidation) {
  auto p = params_for({1.0}, 1);
  p.temperatures = {0.0};
  EXPECT_THROW(p.validate(), Error);
  p = params_for({1.0}, 1);
  p.top_p = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = params_for({1.0}, 1);
  p.logprob_depth = 0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(ExtractAnswer, BoxedThenLastLine) {
  EXPECT_EQ(extract_answer("x \\boxed{1} then \\boxed{\\frac{1}{2}}"), std::optional<std::string>("\\frac{1}{2}"));
  EXPECT_EQ(extract_answer("work\n\n 42 \n\n"), std::optional<std::string>("42"));
  EXPECT_EQ(extract_answer("  \n"), std::nullopt);
}

TEST(ParsePrompts, Lines) {
  const auto p = parse_prompts("{\"problem_id\":\"a\",\"prompt\":\"hi\"}\n\n{\"problem_id\":\"b\",\"prompt\":\"yo\"}\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[1].problem_id, "b");
  EXPECT_EQ(p[1].text, "yo");
  EXPECT_THROW(parse_prompts("{\"problem_id\":1}\n"), Error);
}

}  // namespace
}  // namespace turnpoint
