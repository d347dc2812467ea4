// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/prob.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "taidlab/error.hpp"

namespace taidlab {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  require(values_.size() >= 2, ErrorCode::kInvalidInput,
          "logit vector needs at least 2 entries, got " + std::to_string(values_.size()));
  require(all_finite(values_), ErrorCode::kInvalidInput, "logit vector has non-finite entries");
}

ProbVector ProbVector::from_probs(std::vector<double> probs) {
  require(probs.size() >= 2, ErrorCode::kInvalidInput, "probability vector needs at least 2 entries");
  double sum = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, ErrorCode::kInvalidInput,
            "probability entries must lie in [0, 1]");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= kSimplexTolerance, ErrorCode::kInvalidInput,
          "probabilities must sum to 1");
  return ProbVector(std::move(probs));
}

InterpolationParam::InterpolationParam(double t) : t_(t) {
  require(t >= 0.0 && t <= 1.0, ErrorCode::kInvalidParameter,
          "interpolation parameter must be in [0, 1], got " + std::to_string(t));
}

double log_sum_exp(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - max);
  return max + std::log(sum);
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
}

void log_softmax_into(std::span<const double> logits, std::span<double> out) {
  const double lse = log_sum_exp(logits);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
}

void interpolate_into(std::span<const double> student, std::span<const double> teacher,
                      double t, std::span<double> out) {
  for (std::size_t i = 0; i < student.size(); ++i) {
    out[i] = (1.0 - t) * student[i] + t * teacher[i];
  }
  softmax_into(out, out);
}

ProbVector softmax(const LogitVector& logits) {
  std::vector<double> out(logits.size());
  softmax_into(logits.values(), out);
  return ProbVector(std::move(out));
}

std::vector<double> log_softmax(const LogitVector& logits) {
  std::vector<double> out(logits.size());
  log_softmax_into(logits.values(), out);
  return out;
}

ProbVector interpolate_logits(const LogitVector& student, const LogitVector& teacher,
                              InterpolationParam t) {
  require(student.size() == teacher.size(), ErrorCode::kDimension,
          "student and teacher logits differ in length (" + std::to_string(student.size()) +
              " vs " + std::to_string(teacher.size()) + ")");
  std::vector<double> out(student.size());
  interpolate_into(student.values(), teacher.values(), t.value(), out);
  return ProbVector(std::move(out));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace taidlab
