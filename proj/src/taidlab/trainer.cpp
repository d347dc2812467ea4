// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/trainer.hpp"

#include <cmath>
#include <string>

#include "taidlab/prob.hpp"
#include "taidlab/rng.hpp"

namespace taidlab {

namespace {

constexpr TrainObjective kAllObjectives[] = {
    TrainObjective::kKl,      TrainObjective::kRkl,     TrainObjective::kTvd,
    TrainObjective::kGjsd,    TrainObjective::kSkewKl,  TrainObjective::kSkewRkl,
    TrainObjective::kTaid,    TrainObjective::kTaidLinear};

Objective kernel_for(TrainObjective objective) {
  switch (objective) {
    case TrainObjective::kKl: return Objective::kKl;
    case TrainObjective::kRkl: return Objective::kRkl;
    case TrainObjective::kTvd: return Objective::kTvd;
    case TrainObjective::kGjsd: return Objective::kGjsd;
    case TrainObjective::kSkewKl: return Objective::kSkewKl;
    case TrainObjective::kSkewRkl: return Objective::kSkewRkl;
    case TrainObjective::kTaid:
    case TrainObjective::kTaidLinear: return Objective::kTaid;
  }
  return Objective::kKl;
}

Matrix& parameters(StudentModel& model) {
  if (auto* tab = std::get_if<TabularModel>(&model)) return tab->logits();
  return std::get<LinearModel>(model).weights();
}

// Scatters per-position logit gradients onto the parameter matrix.
void accumulate_parameter_grad(const StudentModel& model,
                               std::span<const std::span<const Token>> histories,
                               const Matrix& logit_grad, Matrix& param_grad) {
  for (std::size_t s = 0; s < histories.size(); ++s) {
    const auto g = logit_grad.row(s);
    auto add_row = [&](std::size_t r) {
      auto dst = param_grad.row(r);
      for (std::size_t j = 0; j < g.size(); ++j) dst[j] += g[j];
    };
    if (const auto* tab = std::get_if<TabularModel>(&model)) {
      add_row(tab->context_index(histories[s]));
    } else {
      const auto& lin = std::get<LinearModel>(model);
      add_row(0);
      const std::size_t bucket = lin.feature_map().active_bucket(histories[s]);
      if (bucket < lin.feature_map().dimension()) add_row(bucket);
    }
  }
}

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

void apply_update(const TrainConfig& config, Matrix& params, const Matrix& grad, AdamState& adam) {
  auto theta = params.data();
  const auto g = grad.data();
  if (config.optimizer == OptimizerKind::kGradientDescent) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= config.learning_rate * g[i];
    return;
  }
  if (adam.m.empty()) {
    adam.m.assign(theta.size(), 0.0);
    adam.v.assign(theta.size(), 0.0);
  }
  ++adam.t;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam.t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    adam.m[i] = b1 * adam.m[i] + (1.0 - b1) * g[i];
    adam.v[i] = b2 * adam.v[i] + (1.0 - b2) * g[i] * g[i];
    const double step = (adam.m[i] / c1) / (std::sqrt(adam.v[i] / c2) + config.adam_epsilon);
    theta[i] -= config.learning_rate * (step + config.weight_decay * theta[i]);
  }
}

double frobenius(const Matrix& m) {
  double sum = 0.0;
  for (double x : m.data()) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace

std::string_view train_objective_name(TrainObjective objective) {
  switch (objective) {
    case TrainObjective::kKl: return "KL";
    case TrainObjective::kRkl: return "RKL";
    case TrainObjective::kTvd: return "TVD";
    case TrainObjective::kGjsd: return "GJSD";
    case TrainObjective::kSkewKl: return "SKL";
    case TrainObjective::kSkewRkl: return "SRKL";
    case TrainObjective::kTaid: return "TAID";
    case TrainObjective::kTaidLinear: return "TAID_LINEAR";
  }
  return "?";
}

std::optional<TrainObjective> parse_train_objective(std::string_view name) {
  for (TrainObjective o : kAllObjectives) {
    if (train_objective_name(o) == name) return o;
  }
  return std::nullopt;
}

bool is_taid(TrainObjective objective) {
  return objective == TrainObjective::kTaid || objective == TrainObjective::kTaidLinear;
}

void TrainConfig::validate() const {
  require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorCode::kInvalidParameter,
          "train.learning_rate must be > 0");
  require(steps >= 0, ErrorCode::kInvalidParameter, "train.steps must be >= 0");
  require(batch_size >= 1, ErrorCode::kInvalidParameter, "train.batch_size must be >= 1");
  require(objective_lambda >= 0.0 && objective_lambda <= 1.0, ErrorCode::kInvalidParameter,
          "train.lambda must be in [0, 1]");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          ErrorCode::kInvalidParameter, "AdamW betas must be in [0, 1)");
  require(adam_epsilon > 0.0 && weight_decay >= 0.0, ErrorCode::kInvalidParameter,
          "AdamW epsilon must be > 0 and weight decay >= 0");
  if (is_taid(objective)) {
    SchedulerConfig probe = scheduler;
    probe.total_steps = scheduler_horizon(steps);
    probe.validate();
  }
}

TrainingDiverged::TrainingDiverged(std::int64_t step, std::vector<StepRecord> partial)
    : Error(ErrorCode::kRunFailed,
            "training diverged (non-finite objective or gradient) at step " + std::to_string(step)),
      step_(step),
      partial_(std::move(partial)) {}

std::int64_t scheduler_horizon(std::int64_t steps) { return steps > 1 ? steps - 1 : 1; }

std::vector<Position> sample_positions(const Corpus& corpus, std::size_t count,
                                       std::uint64_t seed) {
  const std::vector<Position> pool = all_positions(corpus);
  require(!pool.empty(), ErrorCode::kInvalidInput, "corpus has no positions");
  Rng rng(seed);
  std::vector<Position> out(count);
  for (auto& pos : out) pos = pool[rng.below(pool.size())];
  return out;
}

std::vector<std::span<const Token>> histories_at(const Corpus& corpus,
                                                 std::span<const Position> positions) {
  std::vector<std::span<const Token>> out;
  out.reserve(positions.size());
  for (Position pos : positions) out.push_back(history_of(corpus, pos));
  return out;
}

TrainResult train(const TabularModel& teacher, StudentModel student, const Corpus& corpus,
                  const TrainConfig& config) {
  config.validate();
  corpus.validate();
  const std::size_t vocab = teacher.vocab();
  require(vocab_of(student) == vocab, ErrorCode::kDimension,
          "student and teacher vocabularies differ");
  require(corpus.vocab == vocab, ErrorCode::kDimension, "corpus vocabulary differs from teacher");

  const std::vector<Position> pool = all_positions(corpus);
  Rng rng(derive_seed(config.seed, 0x7ea1));

  std::optional<TaidScheduler> scheduler;
  if (is_taid(config.objective)) {
    SchedulerConfig sc = config.scheduler;
    sc.total_steps = scheduler_horizon(config.steps);
    sc.adaptive = config.objective == TrainObjective::kTaid;
    scheduler.emplace(sc);
  }
  const Objective kernel = kernel_for(config.objective);

  TrainResult result{std::move(student), {}};
  result.records.reserve(static_cast<std::size_t>(config.steps));
  Matrix& params = parameters(result.student);
  AdamState adam;
  std::vector<Position> batch_positions(config.batch_size);
  std::vector<double> p(vocab);
  std::vector<double> q(vocab);

  for (std::int64_t n = 0; n < config.steps; ++n) {
    for (auto& pos : batch_positions) pos = pool[rng.below(pool.size())];
    const auto histories = histories_at(corpus, batch_positions);
    Matrix student_logits(config.batch_size, vocab);
    Matrix teacher_logits(config.batch_size, vocab);
    for (std::size_t s = 0; s < config.batch_size; ++s) {
      forward_into(result.student, histories[s], student_logits.row(s));
      const auto row = teacher.row_for(histories[s]);
      std::copy(row.begin(), row.end(), teacher_logits.row(s).begin());
    }
    if (!all_finite(student_logits.data())) {
      throw TrainingDiverged(n, std::move(result.records));
    }

    StepRecord record;
    record.step = n;
    record.t = scheduler ? scheduler->t() : 1.0;
    const double param = scheduler ? record.t : config.objective_lambda;
    const TokenBatch batch(std::move(student_logits), std::move(teacher_logits));
    const ObjectiveValue objective = evaluate_objective(kernel, batch, param);

    for (std::size_t s = 0; s < config.batch_size; ++s) {
      softmax_into(batch.teacher_logits().row(s), p);
      softmax_into(batch.student_logits().row(s), q);
      record.kl_to_teacher += kl_probs(p, q);
      record.rkl_to_teacher += kl_probs(q, p);
    }
    record.kl_to_teacher /= static_cast<double>(config.batch_size);
    record.rkl_to_teacher /= static_cast<double>(config.batch_size);
    record.objective = objective.value;

    Matrix param_grad(params.rows(), params.cols());
    accumulate_parameter_grad(result.student, histories, objective.grad, param_grad);
    record.grad_norm = frobenius(param_grad);
    if (!std::isfinite(record.objective) || !std::isfinite(record.grad_norm)) {
      throw TrainingDiverged(n, std::move(result.records));
    }
    result.records.push_back(record);

    apply_update(config, params, param_grad, adam);
    if (scheduler) scheduler->step(record.objective);
  }
  return result;
}

EvalSummary evaluate(const StudentModel& student, const TabularModel& reference,
                     std::span<const std::span<const Token>> histories) {
  require(!histories.empty(), ErrorCode::kInvalidInput, "evaluation needs at least one context");
  const std::size_t vocab = reference.vocab();
  require(vocab_of(student) == vocab, ErrorCode::kDimension,
          "student and reference vocabularies differ");
  std::vector<double> logits(vocab);
  std::vector<double> p(vocab);
  std::vector<double> q(vocab);
  EvalSummary out;
  for (const auto& history : histories) {
    softmax_into(reference.row_for(history), p);
    forward_into(student, history, logits);
    softmax_into(logits, q);
    out.mean_kl += kl_probs(p, q);
    out.mean_rkl += kl_probs(q, p);
    out.mean_tvd += tvd_probs(p, q);
  }
  const double n = static_cast<double>(histories.size());
  out.mean_kl /= n;
  out.mean_rkl /= n;
  out.mean_tvd /= n;
  return out;
}

}  // namespace taidlab
