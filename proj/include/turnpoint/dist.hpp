// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

// Temperature-scaled categorical distributions and Shannon entropy.
//
// Logits are natural-log scores at base temperature 1.0, defined up to an
// additive constant per decoding step. All entropies are in nats.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "turnpoint/error.hpp"

namespace turnpoint {

/// Probabilities below this are treated as exactly zero inside entropy sums.
inline constexpr double kProbabilityFloor = 1e-300;

inline constexpr double kDefaultMaxTemperature = 2.0;

class Temperature {
 public:
  /// Throws InvalidTemperature unless 0 < value <= t_max.
  explicit Temperature(double value, double t_max = kDefaultMaxTemperature) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw Error(ErrorCode::InvalidTemperature, "temperature must be > 0, got " + std::to_string(value));
    }
    if (value > t_max) {
      throw Error(ErrorCode::InvalidTemperature,
                  "temperature " + std::to_string(value) + " exceeds t_max " + std::to_string(t_max));
    }
  }

  double value() const noexcept { return value_; }
  friend bool operator==(Temperature a, Temperature b) noexcept { return a.value_ == b.value_; }

 private:
  double value_;
};

using TokenList = std::vector<std::string>;

/// An immutable, duplicate-free token list that many steps may share.
class Vocabulary {
 public:
  Vocabulary() : tokens_(std::make_shared<const TokenList>()) {}
  /// Throws InvalidDistribution on duplicate tokens.
  explicit Vocabulary(TokenList tokens);

  const TokenList& tokens() const noexcept { return *tokens_; }
  std::size_t size() const noexcept { return tokens_->size(); }

 private:
  std::shared_ptr<const TokenList> tokens_;
};

/// One decoding step's candidate tokens and their base-temperature logits.
///
/// Token names are held behind a shared immutable list so that many steps
/// over the same vocabulary slice do not duplicate strings.
class TokenDist {
 public:
  TokenDist() = default;

  /// Validates: nonempty, all logits finite, no duplicate tokens.
  TokenDist(TokenList tokens, Eigen::ArrayXd logits);
  TokenDist(Vocabulary vocabulary, Eigen::ArrayXd logits);

  std::size_t size() const noexcept { return static_cast<std::size_t>(logits_.size()); }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const TokenList& tokens() const noexcept { return vocab_.tokens(); }
  const std::string& token(std::size_t i) const { return vocab_.tokens()[i]; }
  const Eigen::ArrayXd& logits() const noexcept { return logits_; }

  friend bool operator==(const TokenDist& a, const TokenDist& b) {
    return a.tokens() == b.tokens() && a.logits_.size() == b.logits_.size() &&
           (a.logits_ == b.logits_).all();
  }

 private:
  void validate() const;

  Vocabulary vocab_;
  Eigen::ArrayXd logits_;
};

struct ProbDist {
  Vocabulary tokens;
  Eigen::ArrayXd probs;
  /// Set when entries were dropped after normalization; the mass may be < 1.
  bool truncated = false;
};

// ---------------------------------------------------------------------------
// Scalar-generic kernels

/// softmax(logits / T) with max-logit subtraction.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> softmax_scaled(
    const Eigen::ArrayBase<Derived>& logits, typename Derived::Scalar temperature) {
  using Scalar = typename Derived::Scalar;
  const Scalar shift = logits.maxCoeff();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> p = ((logits - shift) / temperature).exp();
  p /= p.sum();
  return p;
}

/// -sum p ln p over the given entries; entries below kProbabilityFloor add 0.
template <typename Derived>
typename Derived::Scalar entropy_nats(const Eigen::ArrayBase<Derived>& probs) {
  using Scalar = typename Derived::Scalar;
  const Scalar floor = static_cast<Scalar>(kProbabilityFloor);
  return -(probs > floor).select(probs * probs.max(floor).log(), Scalar(0)).sum();
}

// ---------------------------------------------------------------------------
// Distribution operations

ProbDist scale_by_temperature(const TokenDist& dist, Temperature t);

double shannon_entropy(const ProbDist& p);

/// Keeps the K highest-logit entries ordered by descending logit; ties keep
/// input order. Throws InvalidArgument for K == 0.
TokenDist topk_truncate(const TokenDist& dist, std::size_t k);

/// Keeps the K most probable entries without renormalizing.
ProbDist truncate_probs(const ProbDist& p, std::size_t k);

struct EntropyOptions {
  std::size_t top_k = 1000;
  /// Renormalize the retained top-K mass before taking the entropy.
  bool renormalize = false;
};

/// Entropy of one step at temperature T restricted to its top-K entries.
double step_entropy(const TokenDist& dist, Temperature t, const EntropyOptions& options = {});

}  // namespace turnpoint
