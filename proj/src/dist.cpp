// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#include "turnpoint/dist.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace turnpoint {

namespace {

// Indices of the K largest values, ties resolved by lower index, ordered by
// descending value.
std::vector<Eigen::Index> top_indices(const Eigen::ArrayXd& values, std::size_t k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const auto before = [&](Eigen::Index a, Eigen::Index b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  };
  if (k < idx.size()) {
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
    idx.resize(k);
  } else {
    std::sort(idx.begin(), idx.end(), before);
  }
  return idx;
}

}  // namespace

Vocabulary::Vocabulary(TokenList tokens) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!seen.insert(t).second) throw Error(ErrorCode::InvalidDistribution, "duplicate token '" + t + "'");
  }
  tokens_ = std::make_shared<const TokenList>(std::move(tokens));
}

TokenDist::TokenDist(TokenList tokens, Eigen::ArrayXd logits)
    : vocab_(std::move(tokens)), logits_(std::move(logits)) {
  validate();
}

TokenDist::TokenDist(Vocabulary vocabulary, Eigen::ArrayXd logits)
    : vocab_(std::move(vocabulary)), logits_(std::move(logits)) {
  validate();
}

void TokenDist::validate() const {
  if (logits_.size() == 0) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
  if (static_cast<std::size_t>(logits_.size()) != vocab_.size()) {
    throw Error(ErrorCode::InvalidDistribution, "token/logit length mismatch");
  }
  if (!logits_.isFinite().all()) throw Error(ErrorCode::InvalidDistribution, "non-finite logit");
}

ProbDist scale_by_temperature(const TokenDist& dist, Temperature t) {
  // TokenDist invariants already guarantee finite logits; a default-constructed
  // dist is the only way to get here empty.
  if (dist.size() == 0) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
  ProbDist out;
  out.tokens = dist.vocabulary();
  out.probs = softmax_scaled(dist.logits(), t.value());
  return out;
}

double shannon_entropy(const ProbDist& p) { return entropy_nats(p.probs); }

TokenDist topk_truncate(const TokenDist& dist, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "top-k must be >= 1");
  const auto idx = top_indices(dist.logits(), k);
  TokenList tokens;
  tokens.reserve(idx.size());
  Eigen::ArrayXd logits(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    tokens.push_back(dist.token(static_cast<std::size_t>(idx[i])));
    logits[static_cast<Eigen::Index>(i)] = dist.logits()[idx[i]];
  }
  return TokenDist(std::move(tokens), std::move(logits));
}

ProbDist truncate_probs(const ProbDist& p, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "top-k must be >= 1");
  if (k >= static_cast<std::size_t>(p.probs.size())) return p;
  const auto idx = top_indices(p.probs, k);
  ProbDist out;
  TokenList tokens;
  tokens.reserve(k);
  out.probs.resize(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    tokens.push_back(p.tokens.tokens()[static_cast<std::size_t>(idx[i])]);
    out.probs[static_cast<Eigen::Index>(i)] = p.probs[idx[i]];
  }
  out.tokens = Vocabulary(std::move(tokens));
  out.truncated = true;
  return out;
}

double step_entropy(const TokenDist& dist, Temperature t, const EntropyOptions& options) {
  if (options.top_k == 0) throw Error(ErrorCode::InvalidArgument, "top-k must be >= 1");
  const auto n = dist.size();
  if (n <= options.top_k) return entropy_nats(softmax_scaled(dist.logits(), t.value()));

  // Top-K by logit equals top-K by probability; the selection never needs names.
  const auto idx = top_indices(dist.logits(), options.top_k);
  if (options.renormalize) {
    Eigen::ArrayXd kept(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) kept[static_cast<Eigen::Index>(i)] = dist.logits()[idx[i]];
    return entropy_nats(softmax_scaled(kept, t.value()));
  }
  const Eigen::ArrayXd p = softmax_scaled(dist.logits(), t.value());
  Eigen::ArrayXd kept(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) kept[static_cast<Eigen::Index>(i)] = p[idx[i]];
  return entropy_nats(kept);
}

}  // namespace turnpoint
