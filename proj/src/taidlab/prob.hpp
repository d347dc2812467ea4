// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace taidlab {

/// Raw vocabulary scores. Always finite, length >= 2.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// A point on the probability simplex (entries >= 0, sum 1 within 1e-9).
class ProbVector {
 public:
  /// Validates simplex membership.
  static ProbVector from_probs(std::vector<double> probs);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  friend ProbVector softmax(const LogitVector&);
  friend ProbVector interpolate_logits(const LogitVector&, const LogitVector&,
                                       class InterpolationParam);
  explicit ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

/// Interpolation weight t in [0, 1].
class InterpolationParam {
 public:
  explicit InterpolationParam(double t);
  double value() const noexcept { return t_; }

 private:
  double t_;
};

inline constexpr double kSimplexTolerance = 1e-9;

ProbVector softmax(const LogitVector& logits);
std::vector<double> log_softmax(const LogitVector& logits);

/// softmax((1 - t) * student + t * teacher). The student logits are a
/// constant target here; callers never differentiate through them.
ProbVector interpolate_logits(const LogitVector& student, const LogitVector& teacher,
                              InterpolationParam t);

// Unchecked span kernels shared by the objective and model code. Inputs must be
// finite and `out` must have the same length as `logits`.
void softmax_into(std::span<const double> logits, std::span<double> out);
void log_softmax_into(std::span<const double> logits, std::span<double> out);
double log_sum_exp(std::span<const double> logits);
void interpolate_into(std::span<const double> student, std::span<const double> teacher,
                      double t, std::span<double> out);

bool all_finite(std::span<const double> values);

/// Logistic function, stable for large |x|.
double sigmoid(double x);

}  // namespace taidlab
