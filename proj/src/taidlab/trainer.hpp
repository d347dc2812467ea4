// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "taidlab/error.hpp"
#include "taidlab/models.hpp"
#include "taidlab/objectives.hpp"
#include "taidlab/scheduler.hpp"

namespace taidlab {

enum class TrainObjective { kKl, kRkl, kTvd, kGjsd, kSkewKl, kSkewRkl, kTaid, kTaidLinear };

std::string_view train_objective_name(TrainObjective objective);
std::optional<TrainObjective> parse_train_objective(std::string_view name);
bool is_taid(TrainObjective objective);

enum class OptimizerKind { kGradientDescent, kAdamW };

struct TrainConfig {
  TrainObjective objective = TrainObjective::kKl;
  double learning_rate = 0.1;
  std::int64_t steps = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  // TAID modes only. total_steps is overwritten by train() so that t reaches
  // t_end on the final recorded step.
  SchedulerConfig scheduler;
  double objective_lambda = kDefaultMixtureLambda;

  OptimizerKind optimizer = OptimizerKind::kGradientDescent;
  // Conventional AdamW constants.
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double weight_decay = 0.0;

  void validate() const;
};

/// Metrics of one optimization step, measured on that step's batch before the
/// parameter update. `t` is the interpolation weight used for the step (1 for
/// non-TAID objectives).
struct StepRecord {
  std::int64_t step = 0;
  double objective = 0.0;
  double t = 1.0;
  double kl_to_teacher = 0.0;
  double rkl_to_teacher = 0.0;
  double grad_norm = 0.0;

  bool operator==(const StepRecord&) const = default;
};

struct TrainResult {
  StudentModel student;
  std::vector<StepRecord> records;
};

/// Thrown when a step produces a non-finite objective or gradient.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::int64_t step, std::vector<StepRecord> partial);

  std::int64_t step() const noexcept { return step_; }
  const std::vector<StepRecord>& partial_records() const noexcept { return partial_; }

 private:
  std::int64_t step_;
  std::vector<StepRecord> partial_;
};

/// SchedulerConfig::total_steps used for a run of `steps` optimization steps.
std::int64_t scheduler_horizon(std::int64_t steps);

TrainResult train(const TabularModel& teacher, StudentModel student, const Corpus& corpus,
                  const TrainConfig& config);

struct EvalSummary {
  double mean_kl = 0.0;   // KL(reference || student)
  double mean_rkl = 0.0;  // KL(student || reference)
  double mean_tvd = 0.0;
};

EvalSummary evaluate(const StudentModel& student, const TabularModel& reference,
                     std::span<const std::span<const Token>> histories);

/// Histories for `positions` of `corpus`, viewing into the corpus storage.
std::vector<std::span<const Token>> histories_at(const Corpus& corpus,
                                                 std::span<const Position> positions);

/// `count` positions drawn uniformly with replacement.
std::vector<Position> sample_positions(const Corpus& corpus, std::size_t count, std::uint64_t seed);

}  // namespace taidlab
