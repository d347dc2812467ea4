// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "taidlab/matrix.hpp"

namespace taidlab {

/// Student and teacher logits for S token positions over a vocabulary of V.
class TokenBatch {
 public:
  TokenBatch(Matrix student_logits, Matrix teacher_logits);

  const Matrix& student_logits() const noexcept { return student_; }
  const Matrix& teacher_logits() const noexcept { return teacher_; }
  std::size_t positions() const noexcept { return student_.rows(); }
  std::size_t vocab() const noexcept { return student_.cols(); }

 private:
  Matrix student_;
  Matrix teacher_;
};

/// Objective value in nats (averaged over positions) and its gradient with
/// respect to the student logits.
struct ObjectiveValue {
  double value = 0.0;
  Matrix grad;
};

enum class Objective { kKl, kRkl, kTvd, kGjsd, kSkewKl, kSkewRkl, kTaid };

std::string_view objective_name(Objective objective);
std::optional<Objective> parse_objective(std::string_view name);

/// Mixture weight used by the skew and generalized JS objectives when none is
/// given.
inline constexpr double kDefaultMixtureLambda = 0.1;

/// Floor applied to the denominator inside every log ratio.
inline constexpr double kLogFloor = 1e-12;

ObjectiveValue kl_divergence(const TokenBatch& batch);
ObjectiveValue reverse_kl(const TokenBatch& batch);
ObjectiveValue total_variation(const TokenBatch& batch);
ObjectiveValue generalized_js(const TokenBatch& batch, double lambda = kDefaultMixtureLambda);
ObjectiveValue skew_kl(const TokenBatch& batch, double lambda = kDefaultMixtureLambda);
ObjectiveValue skew_rkl(const TokenBatch& batch, double lambda = kDefaultMixtureLambda);

/// KL(p_t || q) with p_t = softmax((1 - t) * student + t * teacher) held
/// fixed, so the gradient is (q - p_t) / S per row.
ObjectiveValue taid_objective(const TokenBatch& batch, double t);

/// Dispatches on `objective`; `param` is lambda for the mixture objectives and
/// t for TAID, ignored otherwise.
ObjectiveValue evaluate_objective(Objective objective, const TokenBatch& batch, double param);

// Probability-space kernels with the floor convention above: terms with
// p(y) = 0 contribute 0, and the denominator is clamped to kLogFloor.
double kl_probs(std::span<const double> p, std::span<const double> q);
double tvd_probs(std::span<const double> p, std::span<const double> q);

}  // namespace taidlab
