// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/harness.hpp"
#include "turnpoint/grid.hpp"
#include "turnpoint/io.hpp"
#include "turnpoint/records.hpp"
#include "turnpoint/sim.hpp"

namespace turnpoint {
namespace {

RecordSet random_records(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 5.0);
  RecordSet rs;
  for (int i = 0; i < n; ++i) {
    SampleRecord r;
    r.problem_id = "p" + std::to_string(rng() % 4);
    r.temperature = 0.1 * static_cast<double>(1 + rng() % 15);
    r.sample_index = i;
    for (std::uint64_t s = 0; s < rng() % 4; ++s) {
      TokenList tokens;
      Eigen::ArrayXd l(static_cast<Eigen::Index>(1 + rng() % 5));
      for (Eigen::Index k = 0; k < l.size(); ++k) {
        tokens.push_back(k == 2 ? "\"q\"\\\n" : "tok" + std::to_string(k));
        l[k] = g(rng);
      }
      r.steps.push_back({tokens.front(), TokenDist(tokens, l)});
    }
    if (i % 2) r.answer = "a" + std::to_string(i);
    if (i % 3) r.correct = i % 3 == 1;
    if (i % 5) r.score = g(rng);
    if (i % 4 == 0) r.meta["model"] = "m";
    rs.push_back(r);
  }
  return rs;
}

TEST(Records, RoundTripIsExact) {
  const auto rs = random_records(1, 60);
  const auto back = parse_records(records_to_jsonl(rs), true);
  EXPECT_TRUE(back.rejected.empty());
  auto sorted = rs;
  sort_records(sorted);
  EXPECT_EQ(back.records, sorted);
  EXPECT_EQ(records_to_jsonl(back.records), records_to_jsonl(rs));
}

TEST(Records, OutputIsSortedRegardlessOfInputOrder) {
  auto rs = random_records(2, 40);
  const auto a = records_to_jsonl(rs);
  std::shuffle(rs.begin(), rs.end(), std::mt19937_64(3));
  EXPECT_EQ(records_to_jsonl(rs), a);
}

TEST(Records, EmptyAndBlankInput) {
  EXPECT_TRUE(parse_records("").records.empty());
  const auto r = parse_records("\n  \n");
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.rejected.empty());
}

TEST(Records, BadLinesAreReportedWithLineNumbers) {
  const std::string ok = R"({"problem_id":"q","temperature":0.5,"sample_index":0,"steps":[{"chosen":"a","topk":[["a",0.0]]}]})";
  const std::string inf = R"({"problem_id":"q","temperature":0.5,"sample_index":1,"steps":[{"chosen":"a","topk":[["a",1e999]]}]})";
  const std::string nul = R"({"problem_id":"q","temperature":0.5,"sample_index":2,"steps":[{"chosen":"a","topk":[["a",null]]}]})";
  const std::string cold = R"({"problem_id":"q","temperature":0,"sample_index":3})";
  const std::string dup_tok = R"({"problem_id":"q","temperature":0.5,"sample_index":4,"steps":[{"chosen":"a","topk":[["a",0],["a",1]]}]})";
  const std::string text = ok + "\n" + inf + "\n{not json\n" + nul + "\n" + ok + "\n" + cold + "\n" + dup_tok + "\n";
  const auto r = parse_records(text);
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.rejected.size(), 6u);
  // 1e999 overflows the JSON number parser before any logit check
  EXPECT_EQ(r.rejected[0].line, 2u);
  EXPECT_EQ(r.rejected[0].code, ErrorCode::ParseError);
  EXPECT_EQ(r.rejected[1].code, ErrorCode::ParseError);
  EXPECT_EQ(r.rejected[2].code, ErrorCode::InvalidDistribution);
  EXPECT_EQ(r.rejected[3].line, 5u);
  EXPECT_EQ(r.rejected[3].code, ErrorCode::RejectedDuplicate);
  EXPECT_EQ(r.rejected[4].code, ErrorCode::InvalidTemperature);
  EXPECT_EQ(r.rejected[5].code, ErrorCode::InvalidDistribution);

  try {
    parse_records(text, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Records, FileRoundTrip) {
  testing::ScratchDir dir("records");
  const auto rs = random_records(4, 10);
  write_records(rs, dir / "r.jsonl");
  EXPECT_EQ(read_records(dir / "r.jsonl").records.size(), 10u);
  try {
    read_records(dir / "missing.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Records, SyntheticSamplesRoundTrip) {
  sim::SimConfig c;
  c.seed = 4;
  const auto rs = sim::synth_task_samples(c, 0.7, 5, 4, 4, 2);
  EXPECT_EQ(rs.size(), 5u);
  const auto back = parse_records(records_to_jsonl(rs), true).records;
  ASSERT_EQ(back.size(), 5u);
  for (const auto& r : back) {
    EXPECT_TRUE(r.answer.has_value());
    EXPECT_TRUE(r.correct.has_value());
    EXPECT_EQ(r.temperature, 0.7);
  }
}

TEST(Io, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double d = u(rng) * std::pow(10.0, static_cast<double>(i % 20) - 10.0);
    ASSERT_EQ(io::parse_double(io::format_double(d)), d);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(1.5), "1.5");
  EXPECT_THROW(io::parse_double("0.5x"), Error);
  EXPECT_THROW(io::parse_double(""), Error);
  EXPECT_EQ(io::parse_integer("42"), 42);
}

TEST(Io, CsvAndTrim) {
  const auto rows = io::parse_csv("a, b ,c\n\n1,2,3\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(rows[1][2], "3");
  EXPECT_EQ(io::trim("  x y \t"), "x y");
}

TEST(Io, AtomicWriteReplaces) {
  testing::ScratchDir dir("io");
  io::write_file_atomic(dir / "f.txt", "one");
  io::write_file_atomic(dir / "f.txt", "two");
  EXPECT_EQ(io::read_file(dir / "f.txt"), "two");
  EXPECT_EQ(testing::snapshot(dir.path()).size(), 1u);
}

TEST(Grid, DefaultPointsAreExactDecimals) {
  const auto p = TemperatureGrid{}.points();
  ASSERT_EQ(p.size(), 15u);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_EQ(io::format_double(p[k]), io::format_double((k + 1) / 10.0));
  EXPECT_EQ(p[2], 0.3);
  EXPECT_EQ(find_temperature(p, 0.30000000000000004), std::optional<std::size_t>(2));
  EXPECT_FALSE(find_temperature(p, 0.35).has_value());
  EXPECT_THROW((TemperatureGrid{0.0, 0.1, 1.5}.points()), Error);
  EXPECT_THROW((TemperatureGrid{0.5, 0.1, 0.4}.points()), Error);
  EXPECT_EQ((TemperatureGrid{0.5, 0.25, 1.0}.points()), (std::vector<double>{0.5, 0.75, 1.0}));
}

}  // namespace
}  // namespace turnpoint
