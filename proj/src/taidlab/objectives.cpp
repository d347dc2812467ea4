// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "taidlab/error.hpp"
#include "taidlab/prob.hpp"

namespace taidlab {

namespace {

// Both sides are floored so tokens that are negligible under both
// distributions contribute nothing.
double safe_log_ratio(double num, double den) {
  return std::log(std::max(num, kLogFloor) / std::max(den, kLogFloor));
}

// grad_s = q * (g - <q, g>) for any function of q = softmax(s) with dF/dq = g.
void chain_through_softmax(std::span<const double> q, std::span<const double> g, double scale,
                           std::span<double> out) {
  double mean = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) mean += q[j] * g[j];
  for (std::size_t j = 0; j < q.size(); ++j) out[j] = scale * q[j] * (g[j] - mean);
}

void check_lambda(double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0 && std::isfinite(lambda), ErrorCode::kInvalidParameter,
          "mixture weight lambda must be in [0, 1], got " + std::to_string(lambda));
}

// Shared driver: `row` receives (p, q, grad_row, scale) and returns the row value.
template <typename RowFn>
ObjectiveValue reduce_rows(const TokenBatch& batch, RowFn&& row) {
  const std::size_t positions = batch.positions();
  const std::size_t vocab = batch.vocab();
  const double scale = 1.0 / static_cast<double>(positions);
  ObjectiveValue result{0.0, Matrix(positions, vocab)};
  std::vector<double> p(vocab);
  std::vector<double> q(vocab);
  for (std::size_t s = 0; s < positions; ++s) {
    softmax_into(batch.teacher_logits().row(s), p);
    softmax_into(batch.student_logits().row(s), q);
    result.value += row(s, std::span<const double>(p), std::span<const double>(q),
                        result.grad.row(s), scale);
  }
  result.value *= scale;
  return result;
}

}  // namespace

TokenBatch::TokenBatch(Matrix student_logits, Matrix teacher_logits)
    : student_(std::move(student_logits)), teacher_(std::move(teacher_logits)) {
  require(student_.rows() == teacher_.rows() && student_.cols() == teacher_.cols(),
          ErrorCode::kDimension,
          "student batch is " + std::to_string(student_.rows()) + "x" +
              std::to_string(student_.cols()) + " but teacher batch is " +
              std::to_string(teacher_.rows()) + "x" + std::to_string(teacher_.cols()));
  require(student_.rows() >= 1, ErrorCode::kInvalidInput, "batch needs at least one position");
  require(student_.cols() >= 2, ErrorCode::kInvalidInput, "vocabulary needs at least 2 tokens");
  require(all_finite(student_.data()) && all_finite(teacher_.data()), ErrorCode::kInvalidInput,
          "batch logits must be finite");
}

std::string_view objective_name(Objective objective) {
  switch (objective) {
    case Objective::kKl: return "KL";
    case Objective::kRkl: return "RKL";
    case Objective::kTvd: return "TVD";
    case Objective::kGjsd: return "GJSD";
    case Objective::kSkewKl: return "SKL";
    case Objective::kSkewRkl: return "SRKL";
    case Objective::kTaid: return "TAID";
  }
  return "?";
}

std::optional<Objective> parse_objective(std::string_view name) {
  for (Objective o : {Objective::kKl, Objective::kRkl, Objective::kTvd, Objective::kGjsd,
                      Objective::kSkewKl, Objective::kSkewRkl, Objective::kTaid}) {
    if (objective_name(o) == name) return o;
  }
  return std::nullopt;
}

double kl_probs(std::span<const double> p, std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) sum += p[j] * safe_log_ratio(p[j], q[j]);
  }
  return sum;
}

double tvd_probs(std::span<const double> p, std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) sum += std::abs(p[j] - q[j]);
  return 0.5 * sum;
}

ObjectiveValue kl_divergence(const TokenBatch& batch) {
  return reduce_rows(batch, [](std::size_t, auto p, auto q, std::span<double> grad, double scale) {
    for (std::size_t j = 0; j < p.size(); ++j) grad[j] = scale * (q[j] - p[j]);
    return kl_probs(p, q);
  });
}

ObjectiveValue reverse_kl(const TokenBatch& batch) {
  std::vector<double> g(batch.vocab());
  return reduce_rows(batch, [&](std::size_t, auto p, auto q, std::span<double> grad, double scale) {
    for (std::size_t j = 0; j < q.size(); ++j) g[j] = q[j] > 0.0 ? safe_log_ratio(q[j], p[j]) : 0.0;
    chain_through_softmax(q, g, scale, grad);
    return kl_probs(q, p);
  });
}

ObjectiveValue total_variation(const TokenBatch& batch) {
  std::vector<double> g(batch.vocab());
  return reduce_rows(batch, [&](std::size_t, auto p, auto q, std::span<double> grad, double scale) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double diff = q[j] - p[j];
      g[j] = diff > 0.0 ? 0.5 : (diff < 0.0 ? -0.5 : 0.0);
    }
    chain_through_softmax(q, g, scale, grad);
    return tvd_probs(p, q);
  });
}

ObjectiveValue generalized_js(const TokenBatch& batch, double lambda) {
  check_lambda(lambda);
  const std::size_t vocab = batch.vocab();
  std::vector<double> r(vocab);
  std::vector<double> g(vocab);
  return reduce_rows(batch, [&](std::size_t, auto p, auto q, std::span<double> grad, double scale) {
    for (std::size_t j = 0; j < vocab; ++j) r[j] = lambda * p[j] + (1.0 - lambda) * q[j];
    // d/dq [lambda KL(p,r) + (1-lambda) KL(q,r)] = (1-lambda) log(q/r).
    for (std::size_t j = 0; j < vocab; ++j) {
      g[j] = q[j] > 0.0 ? (1.0 - lambda) * safe_log_ratio(q[j], r[j]) : 0.0;
    }
    chain_through_softmax(q, g, scale, grad);
    return lambda * kl_probs(p, r) + (1.0 - lambda) * kl_probs(q, r);
  });
}

ObjectiveValue skew_kl(const TokenBatch& batch, double lambda) {
  check_lambda(lambda);
  const std::size_t vocab = batch.vocab();
  std::vector<double> r(vocab);
  std::vector<double> g(vocab);
  return reduce_rows(batch, [&](std::size_t, auto p, auto q, std::span<double> grad, double scale) {
    for (std::size_t j = 0; j < vocab; ++j) r[j] = lambda * p[j] + (1.0 - lambda) * q[j];
    for (std::size_t j = 0; j < vocab; ++j) {
      g[j] = p[j] > 0.0 ? -(1.0 - lambda) * p[j] / std::max(r[j], kLogFloor) : 0.0;
    }
    chain_through_softmax(q, g, scale, grad);
    return kl_probs(p, r);
  });
}

ObjectiveValue skew_rkl(const TokenBatch& batch, double lambda) {
  check_lambda(lambda);
  const std::size_t vocab = batch.vocab();
  std::vector<double> r(vocab);
  std::vector<double> g(vocab);
  return reduce_rows(batch, [&](std::size_t, auto p, auto q, std::span<double> grad, double scale) {
    for (std::size_t j = 0; j < vocab; ++j) r[j] = lambda * p[j] + (1.0 - lambda) * q[j];
    // The +1 from d(q log q) is dropped: it cancels in the softmax chain rule.
    for (std::size_t j = 0; j < vocab; ++j) {
      g[j] = q[j] > 0.0
                 ? safe_log_ratio(q[j], r[j]) - (1.0 - lambda) * q[j] / std::max(r[j], kLogFloor)
                 : 0.0;
    }
    chain_through_softmax(q, g, scale, grad);
    return kl_probs(q, r);
  });
}

ObjectiveValue taid_objective(const TokenBatch& batch, double t) {
  require(t >= 0.0 && t <= 1.0, ErrorCode::kInvalidParameter,
          "interpolation parameter must be in [0, 1], got " + std::to_string(t));
  std::vector<double> target(batch.vocab());
  return reduce_rows(batch, [&](std::size_t s, auto p, auto q, std::span<double> grad,
                                double scale) {
    (void)p;
    interpolate_into(batch.student_logits().row(s), batch.teacher_logits().row(s), t, target);
    for (std::size_t j = 0; j < q.size(); ++j) grad[j] = scale * (q[j] - target[j]);
    return kl_probs(target, q);
  });
}

ObjectiveValue evaluate_objective(Objective objective, const TokenBatch& batch, double param) {
  switch (objective) {
    case Objective::kKl: return kl_divergence(batch);
    case Objective::kRkl: return reverse_kl(batch);
    case Objective::kTvd: return total_variation(batch);
    case Objective::kGjsd: return generalized_js(batch, param);
    case Objective::kSkewKl: return skew_kl(batch, param);
    case Objective::kSkewRkl: return skew_rkl(batch, param);
    case Objective::kTaid: return taid_objective(batch, param);
  }
  fail(ErrorCode::kInvalidParameter, "unknown objective");
}

}  // namespace taidlab
