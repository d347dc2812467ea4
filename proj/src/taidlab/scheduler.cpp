// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "taidlab/error.hpp"
#include "taidlab/prob.hpp"

namespace taidlab {

void SchedulerConfig::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::kInvalidParameter,
          "taid.alpha must be > 0");
  require(beta >= 0.0 && beta < 1.0, ErrorCode::kInvalidParameter, "taid.beta must be in [0, 1)");
  require(t_start >= 0.0 && t_start <= 1.0, ErrorCode::kInvalidParameter,
          "taid.t_start must be in [0, 1]");
  require(t_end > t_start && t_end <= 1.0, ErrorCode::kInvalidParameter,
          "taid.t_end must be in (t_start, 1]");
  require(total_steps >= 1, ErrorCode::kInvalidParameter, "scheduler needs at least one step");
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::kInvalidParameter,
          "taid.epsilon must be > 0");
}

double linear_t(const SchedulerConfig& config, std::int64_t n) {
  require(n >= 0 && n <= config.total_steps, ErrorCode::kRange,
          "linear schedule step " + std::to_string(n) + " outside [0, " +
              std::to_string(config.total_steps) + "]");
  if (n == config.total_steps) return config.t_end;
  return config.t_start + (config.t_end - config.t_start) * static_cast<double>(n) /
                              static_cast<double>(config.total_steps);
}

SchedulerState initial_state(const SchedulerConfig& config) {
  config.validate();
  SchedulerState state;
  state.t = config.t_start;
  return state;
}

SchedulerState update(const SchedulerState& state, const SchedulerConfig& config,
                      double objective_now) {
  require(std::isfinite(objective_now), ErrorCode::kInvalidInput, "objective must be finite");
  require(objective_now >= 0.0, ErrorCode::kInvalidInput,
          "objective must be non-negative, got " + std::to_string(objective_now));
  // Past the horizon the linear floor stays pinned at t_end.
  const std::int64_t next = std::min(state.step + 1, config.total_steps);
  const double floor = linear_t(config, next);

  SchedulerState out = state;
  out.step = state.step + 1;
  out.prev_objective = objective_now;
  out.has_prev = true;
  if (!config.adaptive) {
    out.t = std::max(state.t, floor);
    return out;
  }
  const double delta =
      state.has_prev ? (state.prev_objective - objective_now) / (state.prev_objective + config.epsilon)
                     : 0.0;
  out.momentum = config.beta * state.momentum + (1.0 - config.beta) * delta;
  const double dt = config.alpha * sigmoid(out.momentum) * (1.0 - state.t);
  out.t = std::min(config.t_end, std::max(floor, state.t + dt));
  return out;
}

TaidScheduler::TaidScheduler(const SchedulerConfig& config)
    : config_(config), state_(initial_state(config)) {}

double TaidScheduler::step(double objective_now) {
  state_ = update(state_, config_, objective_now);
  return state_.t;
}

}  // namespace taidlab
