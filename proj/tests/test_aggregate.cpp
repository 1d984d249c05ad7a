// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "support/oracles.hpp"
#include "turnpoint/aggregate.hpp"
#include "turnpoint/error.hpp"

namespace turnpoint {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

Sample sample(const std::string& answer, long long index, std::optional<bool> correct = std::nullopt,
              std::optional<double> score = std::nullopt) {
  Sample s;
  s.answer = answer;
  s.normalized_answer = default_normalize(answer);
  s.correct = correct;
  s.score = score;
  s.sample_index = index;
  return s;
}

TEST(Normalize, DefaultAndIdentity) {
  EXPECT_EQ(default_normalize("  4 "), "4");
  EXPECT_EQ(default_normalize("Ok"), default_normalize("ok"));
  EXPECT_EQ(default_normalize(" x \t\n  Y  z"), "x y z");
  EXPECT_NE(normalize_answer("1/2", identity_normalize), normalize_answer("0.5", identity_normalize));
  EXPECT_EQ(normalize_answer(" A ", identity_normalize), " A ");
  const Normalizer strip_dollars = [](std::string_view s) {
    std::string out;
    for (const char c : s)
      if (c != '$') out.push_back(c);
    return out;
  };
  EXPECT_EQ(normalize_answer("$5$", strip_dollars), "5");
}

TEST(MajorityVote, HandValues) {
  const std::vector<Sample> a{sample("4", 0), sample("4", 1), sample("5", 2)};
  EXPECT_EQ(majority_vote(a).answer, "4");
  EXPECT_FALSE(majority_vote(a).tie);

  const std::vector<Sample> b{sample("b", 3), sample("a", 1)};
  const auto v = majority_vote(b);
  EXPECT_EQ(v.answer, "a");
  EXPECT_TRUE(v.tie);
  EXPECT_EQ(v.representative, 1u);

  std::vector<Sample> big;
  for (int i = 0; i < 128; ++i) big.push_back(sample(i % 2 == 0 ? "y" : "x", 127 - i));
  const auto w = majority_vote(big);
  EXPECT_EQ(w.answer, "x");  // "x" holds sample_index 0
  EXPECT_EQ(w.count, 64u);
  EXPECT_TRUE(w.tie);

  EXPECT_EQ(code_of([] { majority_vote({}); }), ErrorCode::EmptySampleSet);
}

TEST(MajorityVote, NormalizationMergesVariants) {
  const std::vector<Sample> s{sample("Ok", 0), sample("x", 1), sample(" ok", 2), sample("x", 3), sample("OK ", 4)};
  EXPECT_EQ(majority_vote(s).answer, "ok");
  EXPECT_EQ(majority_vote(s).count, 3u);
}

TEST(MajorityVote, PermutationInvariance) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<Sample> s;
    const int n = 1 + rep % 20;
    for (int i = 0; i < n; ++i) s.push_back(sample(std::string(1, static_cast<char>('a' + rng() % 4)), i * 3 + 1));
    const auto want = majority_vote(s);
    std::shuffle(s.begin(), s.end(), rng);
    const auto got = majority_vote(s);
    ASSERT_EQ(got.answer, want.answer);
    ASSERT_EQ(got.count, want.count);
    ASSERT_EQ(got.tie, want.tie);
  }
}

TEST(BestOfN, HandValues) {
  const std::vector<Sample> a{sample("a", 0, {}, 0.1), sample("b", 1, {}, 0.9), sample("c", 2, {}, 0.5)};
  EXPECT_EQ(best_of_n(a), 1u);
  const std::vector<Sample> eq{sample("a", 5, {}, 0.3), sample("b", 2, {}, 0.3), sample("c", 9, {}, 0.3)};
  EXPECT_EQ(best_of_n(eq), 1u);
  const std::vector<Sample> missing{sample("a", 0, {}, 0.1), sample("b", 1)};
  EXPECT_EQ(code_of([&] { best_of_n(missing); }), ErrorCode::MissingReward);
  EXPECT_EQ(code_of([] { best_of_n({}); }), ErrorCode::EmptySampleSet);
}

TEST(BestOfN, PerfectRewardMeansAnyCorrect) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Sample> s;
    bool any = false;
    for (int i = 0; i < 1 + rep % 9; ++i) {
      const bool ok = rng() % 5 == 0;
      any = any || ok;
      s.push_back(sample("a", i, ok, ok ? 1.0 : 0.0));
    }
    ASSERT_EQ(*s[best_of_n(s)].correct, any);
  }
}

TEST(PassAtK, HandValues) {
  EXPECT_NEAR(pass_at_k(4, 2, 2), 5.0 / 6.0, 1e-15);
  for (std::size_t n = 1; n <= 20; ++n) {
    for (std::size_t k = 1; k <= n; ++k) EXPECT_EQ(pass_at_k(n, 0, k), 0.0);
    EXPECT_EQ(pass_at_k(n, n, 1), 1.0);
  }
  EXPECT_EQ(code_of([] { pass_at_k(3, 1, 4); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { pass_at_k(3, 4, 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { pass_at_k(3, 1, 0); }), ErrorCode::InvalidArgument);
}

TEST(PassAtK, ExhaustiveEnumerationOracle) {
  for (unsigned n = 1; n <= 12; ++n) {
    for (unsigned c = 0; c <= n; ++c) {
      for (unsigned k = 1; k <= n; ++k) {
        const auto [hits, total] = oracle::pass_at_k_counts(n, c, k);
        ASSERT_NEAR(pass_at_k(n, c, k), static_cast<double>(hits) / static_cast<double>(total), 1e-12)
            << n << " " << c << " " << k;
      }
    }
  }
}

TEST(PassAtK, MonotoneAndStableAt256) {
  for (std::size_t c = 0; c <= 256; c += 8) {
    double prev = -1.0;
    for (std::size_t k = 1; k <= 256; ++k) {
      const double p = pass_at_k(256, c, k);
      ASSERT_TRUE(std::isfinite(p));
      ASSERT_GE(p, prev);
      ASSERT_GE(p, 0.0);
      ASSERT_LE(p, 1.0);
      prev = p;
    }
    EXPECT_EQ(pass_at_k(256, c, 256), c >= 1 ? 1.0 : 0.0);
  }
  for (std::size_t k = 1; k <= 256; k += 17) {
    double prev = -1.0;
    for (std::size_t c = 0; c <= 256; ++c) {
      ASSERT_GE(pass_at_k(256, c, k), prev);
      prev = pass_at_k(256, c, k);
    }
  }
}

// ---------------------------------------------------------------------------

SamplesByTemperature fixture_sets(std::uint64_t seed, std::size_t n, const std::vector<double>& temps) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SamplesByTemperature sets;
  for (std::size_t ti = 0; ti < temps.size(); ++ti) {
    for (int p = 0; p < 5; ++p) {
      auto& v = sets[temps[ti]]["p" + std::to_string(p)];
      const double acc = 0.2 + 0.12 * static_cast<double>(p) + 0.05 * static_cast<double>(ti);
      for (std::size_t i = 0; i < n; ++i) {
        const bool ok = u(rng) < acc;
        v.push_back(sample(ok ? "right" : "wrong" + std::to_string(rng() % 3), static_cast<long long>(i), ok,
                           u(rng)));
      }
    }
  }
  return sets;
}

TEST(AccuracyHeatmap, SampleSizeOneAgreesAcrossAggregations) {
  const auto sets = fixture_sets(1, 16, {0.5, 1.0});
  const std::vector<std::size_t> one{1};
  HeatmapOptions mv;
  mv.resamples = 4000;
  HeatmapOptions bon;
  bon.aggregation = Aggregation::BestOfN;
  const auto a = accuracy_heatmap(sets, one, mv);
  const auto b = accuracy_heatmap(sets, one, bon);
  for (int j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (const auto& [id, v] : sets.at(a.temperatures[static_cast<std::size_t>(j)])) {
      double ok = 0;
      for (const auto& s : v) ok += *s.correct ? 1 : 0;
      mean += ok / static_cast<double>(v.size());
    }
    mean /= 5.0;
    EXPECT_NEAR(b.accuracy(0, j), mean, 1e-12);
    EXPECT_NEAR(a.accuracy(0, j), mean, 0.02);
  }
}

TEST(AccuracyHeatmap, AllCorrectIsOneEverywhere) {
  SamplesByTemperature sets;
  for (const double t : {0.3, 0.6}) {
    for (int i = 0; i < 8; ++i) sets[t]["q"].push_back(sample(i % 2 ? "a" : "b", i, true, 0.5));
  }
  const std::vector<std::size_t> sizes{1, 3, 8};
  for (const auto agg : {Aggregation::MajorityVoting, Aggregation::BestOfN}) {
    HeatmapOptions o;
    o.aggregation = agg;
    EXPECT_EQ(accuracy_heatmap(sets, sizes, o).accuracy.minCoeff(), 1.0);
  }
}

TEST(AccuracyHeatmap, BestOfNAnalyticMatchesMonteCarlo) {
  const auto sets = fixture_sets(3, 10, {0.7});
  const std::vector<std::size_t> sizes{2, 4, 7};
  HeatmapOptions analytic;
  analytic.aggregation = Aggregation::BestOfN;
  HeatmapOptions mc = analytic;
  mc.resamples = 10000;
  // Scores equal to correctness make picking by score a perfect verifier.
  auto scored = sets;
  for (auto& [t, set] : scored)
    for (auto& [id, v] : set)
      for (auto& s : v) s.score = *s.correct ? 1.0 : 0.0;
  mc.use_scores = true;
  const auto a = accuracy_heatmap(sets, sizes, analytic);
  const auto b = accuracy_heatmap(scored, sizes, mc);
  EXPECT_LE((a.accuracy - b.accuracy).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_EQ(a.resamples, 0u);
}

TEST(AccuracyHeatmap, DeterministicShapeAndErrors) {
  const auto sets = fixture_sets(4, 12, {0.2, 0.4, 0.6});
  const std::vector<std::size_t> sizes{4, 1, 8};
  HeatmapOptions o;
  o.seed = 9;
  o.workers = 1;
  const auto a = accuracy_heatmap(sets, sizes, o);
  o.workers = 4;
  const auto b = accuracy_heatmap(sets, sizes, o);
  EXPECT_EQ(heatmap_to_csv(a), heatmap_to_csv(b));
  EXPECT_EQ(a.sample_sizes, (std::vector<std::size_t>{1, 4, 8}));
  EXPECT_EQ(a.accuracy.rows(), 3);
  EXPECT_EQ(a.accuracy.cols(), 3);
  EXPECT_GE(a.accuracy.minCoeff(), 0.0);
  EXPECT_LE(a.accuracy.maxCoeff(), 1.0);
  const auto csv = heatmap_to_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sample_size,0.2,0.4,0.6");

  const std::vector<std::size_t> too_big{13};
  EXPECT_EQ(code_of([&] { accuracy_heatmap(sets, too_big, o); }), ErrorCode::SampleSizeTooLarge);
  EXPECT_EQ(code_of([&] { accuracy_heatmap({}, sizes, o); }), ErrorCode::EmptyInput);
}

TEST(GroupSamples, FromRecords) {
  RecordSet rs;
  for (int i = 2; i >= 0; --i) {
    SampleRecord r;
    r.problem_id = "q";
    r.temperature = 0.30000000000000004;
    r.sample_index = i;
    r.answer = i == 1 ? " OK" : "err";
    r.correct = i == 1;
    rs.push_back(r);
  }
  const auto g = group_samples(rs);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.begin()->first, 0.3);
  const auto& v = g.begin()->second.at("q");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].sample_index, 0);
  EXPECT_EQ(v[1].normalized_answer, "ok");
  EXPECT_EQ(v[1].answer, " OK");
  rs.push_back(rs.front());
  EXPECT_EQ(code_of([&] { group_samples(rs); }), ErrorCode::RejectedDuplicate);
}

// ---------------------------------------------------------------------------

TEST(EpsOptimalRange, HandValues) {
  const std::map<double, double> acc{{0.5, 0.60}, {0.7, 0.64}, {0.9, 0.63}, {1.1, 0.58}};
  const auto r = eps_optimal_range(acc, 0.02);
  EXPECT_EQ(r.low, 0.7);
  EXPECT_EQ(r.high, 0.9);
  EXPECT_NEAR(r.midpoint, 0.8, 1e-12);
  EXPECT_EQ(r.peak_temperature, 0.7);
  EXPECT_EQ(r.peak_accuracy, 0.64);

  const auto single = eps_optimal_range({{0.4, 0.3}});
  EXPECT_EQ(single.low, 0.4);
  EXPECT_EQ(single.high, 0.4);
  EXPECT_EQ(single.midpoint, 0.4);

  const auto flat = eps_optimal_range({{0.1, 0.5}, {0.2, 0.5}, {0.3, 0.5}});
  EXPECT_EQ(flat.low, 0.1);
  EXPECT_EQ(flat.high, 0.3);
  EXPECT_EQ(flat.peak_temperature, 0.1);

  EXPECT_EQ(code_of([] { eps_optimal_range({}); }), ErrorCode::EmptyInput);
}

TEST(EpsOptimalRange, NonContiguousPointsAreExcluded) {
  const std::map<double, double> acc{{0.1, 0.70}, {0.2, 0.50}, {0.3, 0.71}, {0.4, 0.70}, {0.5, 0.40}};
  const auto r = eps_optimal_range(acc, 0.02);
  EXPECT_EQ(r.low, 0.3);
  EXPECT_EQ(r.high, 0.4);
  EXPECT_EQ(r.excluded, (std::vector<double>{0.1}));
}

TEST(EpsOptimalRange, Properties) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    std::map<double, double> acc;
    for (int j = 1; j <= 15; ++j) acc[j / 10.0] = std::round(u(rng) * 20.0) / 20.0;
    const double eps = rep % 3 == 0 ? 0.0 : 0.1 * u(rng);
    const auto r = eps_optimal_range(acc, eps);
    ASSERT_LE(r.low, r.midpoint + 1e-12);
    ASSERT_LE(r.midpoint, r.high + 1e-12);
    ASSERT_NEAR(r.midpoint, (r.low + r.high) / 2.0, 1e-9);
    for (const auto& [t, a] : acc) {
      if (t >= r.low && t <= r.high) {
        ASSERT_GE(a, r.peak_accuracy - eps - 1e-12);
      }
      ASSERT_LE(a, r.peak_accuracy);
    }
    if (eps == 0.0) {
      for (const auto& [t, a] : acc) {
        if (t >= r.low && t <= r.high) {
          ASSERT_EQ(a, r.peak_accuracy);
        }
      }
    }
    // maximality: the neighbours just outside fail the threshold
    const auto lo = acc.find(r.low);
    if (lo != acc.begin()) {
      ASSERT_LT(std::prev(lo)->second, r.peak_accuracy - eps - 1e-12);
    }
    const auto hi = std::next(acc.find(r.high));
    if (hi != acc.end()) {
      ASSERT_LT(hi->second, r.peak_accuracy - eps - 1e-12);
    }
  }
}

TEST(EvaluatePrediction, HandValues) {
  const std::map<double, double> acc{{0.5, 0.60}, {0.7, 0.64}, {0.9, 0.63}, {1.1, 0.58}};
  const auto r = eps_optimal_range(acc);
  const auto in = evaluate_prediction(0.8, r, acc);
  EXPECT_TRUE(in.hit);
  EXPECT_EQ(in.temperature_gap, 0.0);

  const auto out = evaluate_prediction(1.0, r, acc);
  EXPECT_FALSE(out.hit);
  EXPECT_NEAR(out.temperature_gap, 0.1, 1e-12);

  const auto peak = evaluate_prediction(0.7, r, acc);
  EXPECT_EQ(peak.performance_drop, 0.0);

  const auto far = evaluate_prediction(1.1, r, acc);
  EXPECT_NEAR(far.performance_drop, 0.06, 1e-12);
  EXPECT_EQ(far.snapped_temperature, 1.1);
}

TEST(EvaluatePrediction, Properties) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    std::map<double, double> acc;
    for (int j = 1; j <= 15; ++j) acc[j / 10.0] = u(rng);
    const auto r = eps_optimal_range(acc, 0.05);
    const double pred = std::round((0.1 + 1.4 * u(rng)) * 10.0) / 10.0;
    const auto s = evaluate_prediction(pred, r, acc);
    ASSERT_EQ(s.hit, s.temperature_gap == 0.0);
    if (s.temperature_gap > 0.0) {
      ASSERT_TRUE(pred < r.low || pred > r.high);
    }
    ASSERT_GE(s.performance_drop, 0.0);
    ASSERT_NEAR(s.performance_drop, r.peak_accuracy - acc.at(pred), 1e-15);
  }
}

TEST(CalibrateBeta, MidpointTable) {
  const std::vector<double> bon{0.6, 0.8, 0.6, 0.6, 0.7, 0.5, 0.6, 1.1, 1.2, 0.5, 0.6, 1.3, 1.0};
  const std::vector<double> mv{0.6, 0.9, 0.6, 0.5, 0.3, 0.6, 0.5, 1.1, 0.9, 0.5, 0.6, 1.0, 0.8};
  const auto c = calibrate_beta(bon, mv);
  const double mean_a = oracle::mean_of_tenths({6, 8, 6, 6, 7, 5, 6, 11, 12, 5, 6, 13, 10});
  const double mean_b = oracle::mean_of_tenths({6, 9, 6, 5, 3, 6, 5, 11, 9, 5, 6, 10, 8});
  EXPECT_NEAR(c.mean_a, mean_a, 1e-12);
  EXPECT_NEAR(c.mean_b, mean_b, 1e-12);
  EXPECT_NEAR(c.mean_a, 0.7769, 1e-4);
  EXPECT_NEAR(c.mean_b, 0.6846, 1e-4);
  EXPECT_NEAR(c.difference, 0.0923, 1e-4);
  EXPECT_EQ(c.rounded, 0.1);
  const std::vector<double> short_list{0.5};
  EXPECT_EQ(code_of([&] { calibrate_beta(bon, short_list); }), ErrorCode::PairedInputMismatch);
}

TEST(MetricJson, FieldNames) {
  const auto r = eps_optimal_range({{0.5, 0.60}, {0.7, 0.64}});
  const auto j = nlohmann::json::parse(eps_range_to_json(r));
  for (const char* k : {"epsilon", "low", "high", "midpoint", "peak_temperature", "peak_accuracy", "excluded"})
    EXPECT_TRUE(j.contains(k)) << k;
  const auto s = nlohmann::json::parse(prediction_score_to_json(evaluate_prediction(0.5, r, {{0.5, 0.6}, {0.7, 0.64}})));
  for (const char* k : {"hit", "temperature_gap", "performance_drop"}) EXPECT_TRUE(s.contains(k)) << k;
  const auto b = nlohmann::json::parse(beta_calibration_to_json(BetaCalibration{0.7, 0.6, 0.1, 0.1}));
  for (const char* k : {"mean_a", "mean_b", "difference", "rounded"}) EXPECT_TRUE(b.contains(k)) << k;
}

}  // namespace
}  // namespace turnpoint
