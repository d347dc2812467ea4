// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstdint>

namespace taidlab {

struct SchedulerConfig {
  double alpha = 5e-4;   // step size for t
  double beta = 0.99;    // momentum coefficient
  double t_start = 0.2;
  double t_end = 1.0;
  std::int64_t total_steps = 1;
  double epsilon = 1e-8;  // guards the relative-change denominator
  bool adaptive = true;   // false: pure linear schedule

  void validate() const;
};

struct SchedulerState {
  double t = 0.0;
  double momentum = 0.0;
  double prev_objective = 0.0;
  bool has_prev = false;
  std::int64_t step = 0;
};

/// t_start + (t_end - t_start) * n / N.
double linear_t(const SchedulerConfig& config, std::int64_t n);

SchedulerState initial_state(const SchedulerConfig& config);

/// One adaptive update driven by the objective value of the step just taken.
///
/// delta = (prev - now) / (prev + eps), zero on the first call;
/// m = beta * m + (1 - beta) * delta;
/// t = min(t_end, max(linear_t(n + 1), t + alpha * sigmoid(m) * (1 - t))).
///
/// In linear mode t is just linear_t(n + 1).
SchedulerState update(const SchedulerState& state, const SchedulerConfig& config,
                      double objective_now);

/// Owning wrapper used by the trainer and the C API.
class TaidScheduler {
 public:
  explicit TaidScheduler(const SchedulerConfig& config);

  double t() const noexcept { return state_.t; }
  const SchedulerState& state() const noexcept { return state_; }
  const SchedulerConfig& config() const noexcept { return config_; }

  double step(double objective_now);

 private:
  SchedulerConfig config_;
  SchedulerState state_;
};

}  // namespace taidlab
