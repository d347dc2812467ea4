// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/taidlab.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "taidlab/analysis.hpp"
#include "taidlab/error.hpp"
#include "taidlab/experiment.hpp"
#include "taidlab/objectives.hpp"
#include "taidlab/plot.hpp"
#include "taidlab/prob.hpp"
#include "taidlab/scheduler.hpp"
#include "taidlab/theory.hpp"

struct taidlab_scheduler {
  taidlab::TaidScheduler impl;
};

struct taidlab_spectrum {
  taidlab::GramSpectrum impl;
};

struct taidlab_trace {
  taidlab::SimTrace impl;
};

namespace {

thread_local std::string g_last_error;

taidlab_status to_status(taidlab::ErrorCode code) {
  using taidlab::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidInput: return TAIDLAB_ERR_INVALID_INPUT;
    case ErrorCode::kDimension: return TAIDLAB_ERR_DIMENSION;
    case ErrorCode::kInvalidParameter: return TAIDLAB_ERR_INVALID_PARAMETER;
    case ErrorCode::kRange: return TAIDLAB_ERR_RANGE;
    case ErrorCode::kInvalidKernel: return TAIDLAB_ERR_INVALID_KERNEL;
    case ErrorCode::kConfig: return TAIDLAB_ERR_CONFIG;
    case ErrorCode::kRunFailed: return TAIDLAB_ERR_RUN_FAILED;
    case ErrorCode::kIo: return TAIDLAB_ERR_IO;
  }
  return TAIDLAB_ERR_INTERNAL;
}

taidlab_status set_error(taidlab_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
taidlab_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return TAIDLAB_OK;
  } catch (const taidlab::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(TAIDLAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(TAIDLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(TAIDLAB_ERR_INTERNAL, "unknown error");
  }
}

#define TAIDLAB_REQUIRE_ARG(ptr)                                                  \
  do {                                                                            \
    if ((ptr) == nullptr) return set_error(TAIDLAB_ERR_NULL_ARGUMENT, #ptr " is NULL"); \
  } while (0)

std::vector<double> copy(const double* p, std::size_t n) { return std::vector<double>(p, p + n); }

taidlab::SchedulerConfig to_cpp(const taidlab_scheduler_config& c) {
  taidlab::SchedulerConfig out;
  out.alpha = c.alpha;
  out.beta = c.beta;
  out.t_start = c.t_start;
  out.t_end = c.t_end;
  out.epsilon = c.epsilon;
  out.total_steps = c.total_steps;
  out.adaptive = c.adaptive != 0;
  return out;
}

void copy_text(char* dst, std::size_t cap, const std::string& src) {
  const std::size_t n = std::min(cap - 1, src.size());
  std::memcpy(dst, src.data(), n);
  dst[n] = '\0';
}

}  // namespace

extern "C" {

const char* taidlab_version(void) { return taidlab::kLibraryVersion.data(); }

const char* taidlab_status_name(taidlab_status status) {
  switch (status) {
    case TAIDLAB_OK: return "ok";
    case TAIDLAB_ERR_INVALID_INPUT: return "invalid input";
    case TAIDLAB_ERR_DIMENSION: return "dimension mismatch";
    case TAIDLAB_ERR_INVALID_PARAMETER: return "invalid parameter";
    case TAIDLAB_ERR_RANGE: return "out of range";
    case TAIDLAB_ERR_INVALID_KERNEL: return "invalid kernel";
    case TAIDLAB_ERR_CONFIG: return "config error";
    case TAIDLAB_ERR_RUN_FAILED: return "run failed";
    case TAIDLAB_ERR_IO: return "i/o error";
    case TAIDLAB_ERR_NULL_ARGUMENT: return "null argument";
    case TAIDLAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* taidlab_last_error(void) { return g_last_error.c_str(); }

// ---- Distributions ----------------------------------------------------------

taidlab_status taidlab_softmax(const double* logits, size_t n, double* out) {
  TAIDLAB_REQUIRE_ARG(logits);
  TAIDLAB_REQUIRE_ARG(out);
  return guarded([&] {
    const taidlab::ProbVector p = taidlab::softmax(taidlab::LogitVector(copy(logits, n)));
    std::copy(p.probs().begin(), p.probs().end(), out);
  });
}

taidlab_status taidlab_log_softmax(const double* logits, size_t n, double* out) {
  TAIDLAB_REQUIRE_ARG(logits);
  TAIDLAB_REQUIRE_ARG(out);
  return guarded([&] {
    const std::vector<double> p = taidlab::log_softmax(taidlab::LogitVector(copy(logits, n)));
    std::copy(p.begin(), p.end(), out);
  });
}

taidlab_status taidlab_interpolate(const double* student, const double* teacher, size_t n,
                                   double t, double* out) {
  TAIDLAB_REQUIRE_ARG(student);
  TAIDLAB_REQUIRE_ARG(teacher);
  TAIDLAB_REQUIRE_ARG(out);
  return guarded([&] {
    const taidlab::ProbVector p = taidlab::interpolate_logits(
        taidlab::LogitVector(copy(student, n)), taidlab::LogitVector(copy(teacher, n)),
        taidlab::InterpolationParam(t));
    std::copy(p.probs().begin(), p.probs().end(), out);
  });
}

// ---- Objectives -------------------------------------------------------------

taidlab_status taidlab_objective_parse(const char* name, taidlab_objective* out) {
  TAIDLAB_REQUIRE_ARG(name);
  TAIDLAB_REQUIRE_ARG(out);
  const auto parsed = taidlab::parse_objective(name);
  if (!parsed) {
    return set_error(TAIDLAB_ERR_INVALID_INPUT, std::string("unknown objective '") + name + "'");
  }
  *out = static_cast<taidlab_objective>(*parsed);
  return TAIDLAB_OK;
}

const char* taidlab_objective_name(taidlab_objective objective) {
  if (objective < TAIDLAB_OBJECTIVE_KL || objective > TAIDLAB_OBJECTIVE_TAID) return "";
  return taidlab::objective_name(static_cast<taidlab::Objective>(objective)).data();
}

taidlab_status taidlab_objective_eval(taidlab_objective objective, const double* student,
                                      const double* teacher, size_t rows, size_t vocab,
                                      double param, double* value, double* grad) {
  TAIDLAB_REQUIRE_ARG(student);
  TAIDLAB_REQUIRE_ARG(teacher);
  TAIDLAB_REQUIRE_ARG(value);
  if (objective < TAIDLAB_OBJECTIVE_KL || objective > TAIDLAB_OBJECTIVE_TAID) {
    return set_error(TAIDLAB_ERR_INVALID_INPUT, "unknown objective");
  }
  return guarded([&] {
    taidlab::Matrix s(rows, vocab);
    taidlab::Matrix q(rows, vocab);
    std::copy(student, student + rows * vocab, s.data().begin());
    std::copy(teacher, teacher + rows * vocab, q.data().begin());
    const taidlab::TokenBatch batch(std::move(s), std::move(q));
    const taidlab::ObjectiveValue v =
        taidlab::evaluate_objective(static_cast<taidlab::Objective>(objective), batch, param);
    *value = v.value;
    if (grad != nullptr) std::copy(v.grad.data().begin(), v.grad.data().end(), grad);
  });
}

// ---- Interpolation schedule -------------------------------------------------

void taidlab_scheduler_config_init(taidlab_scheduler_config* config) {
  if (config == nullptr) return;
  const taidlab::SchedulerConfig d;
  *config = {d.alpha, d.beta, d.t_start, d.t_end, d.epsilon, d.total_steps, d.adaptive ? 1 : 0};
}

taidlab_status taidlab_linear_t(const taidlab_scheduler_config* config, int64_t n, double* out) {
  TAIDLAB_REQUIRE_ARG(config);
  TAIDLAB_REQUIRE_ARG(out);
  return guarded([&] {
    const taidlab::SchedulerConfig c = to_cpp(*config);
    c.validate();
    *out = taidlab::linear_t(c, n);
  });
}

taidlab_status taidlab_scheduler_create(const taidlab_scheduler_config* config,
                                        taidlab_scheduler** out) {
  TAIDLAB_REQUIRE_ARG(config);
  TAIDLAB_REQUIRE_ARG(out);
  *out = nullptr;
  return guarded([&] { *out = new taidlab_scheduler{taidlab::TaidScheduler(to_cpp(*config))}; });
}

taidlab_status taidlab_scheduler_step(taidlab_scheduler* scheduler, double objective,
                                      double* t_out) {
  TAIDLAB_REQUIRE_ARG(scheduler);
  return guarded([&] {
    const double t = scheduler->impl.step(objective);
    if (t_out != nullptr) *t_out = t;
  });
}

taidlab_status taidlab_scheduler_t(const taidlab_scheduler* scheduler, double* out) {
  TAIDLAB_REQUIRE_ARG(scheduler);
  TAIDLAB_REQUIRE_ARG(out);
  *out = scheduler->impl.t();
  return TAIDLAB_OK;
}

taidlab_status taidlab_scheduler_momentum(const taidlab_scheduler* scheduler, double* out) {
  TAIDLAB_REQUIRE_ARG(scheduler);
  TAIDLAB_REQUIRE_ARG(out);
  *out = scheduler->impl.state().momentum;
  return TAIDLAB_OK;
}

void taidlab_scheduler_destroy(taidlab_scheduler* scheduler) { delete scheduler; }

// ---- Regression recursion ---------------------------------------------------

void taidlab_sim_config_init(taidlab_sim_config* config) {
  if (config == nullptr) return;
  *config = {0.05, 10, TAIDLAB_SIM_TAID, TAIDLAB_ALPHA_D_MIN, 0.0, 0};
}

taidlab_status taidlab_spectrum_create(const double* gram, size_t n, taidlab_spectrum** out) {
  TAIDLAB_REQUIRE_ARG(gram);
  TAIDLAB_REQUIRE_ARG(out);
  *out = nullptr;
  return guarded([&] {
    taidlab::Matrix g(n, n);
    std::copy(gram, gram + n * n, g.data().begin());
    *out = new taidlab_spectrum{taidlab::spectrum_from_gram(g)};
  });
}

size_t taidlab_spectrum_size(const taidlab_spectrum* spectrum) {
  return spectrum == nullptr ? 0 : spectrum->impl.size();
}

taidlab_status taidlab_spectrum_eigenvalues(const taidlab_spectrum* spectrum, double* out) {
  TAIDLAB_REQUIRE_ARG(spectrum);
  TAIDLAB_REQUIRE_ARG(out);
  const auto d = spectrum->impl.d();
  std::copy(d.begin(), d.end(), out);
  return TAIDLAB_OK;
}

taidlab_status taidlab_spectrum_kappa(const taidlab_spectrum* spectrum, double* out) {
  TAIDLAB_REQUIRE_ARG(spectrum);
  TAIDLAB_REQUIRE_ARG(out);
  *out = spectrum->impl.kappa();
  return TAIDLAB_OK;
}

void taidlab_spectrum_destroy(taidlab_spectrum* spectrum) { delete spectrum; }

taidlab_status taidlab_run_recursion(const taidlab_spectrum* spectrum, const double* y0, size_t n,
                                     const taidlab_sim_config* config, taidlab_trace** out) {
  TAIDLAB_REQUIRE_ARG(spectrum);
  TAIDLAB_REQUIRE_ARG(y0);
  TAIDLAB_REQUIRE_ARG(config);
  TAIDLAB_REQUIRE_ARG(out);
  *out = nullptr;
  if (config->mode != TAIDLAB_SIM_TAID && config->mode != TAIDLAB_SIM_SELF_DISTILL) {
    return set_error(TAIDLAB_ERR_INVALID_PARAMETER, "unknown simulation mode");
  }
  if (config->alpha_mode < TAIDLAB_ALPHA_D_MIN || config->alpha_mode > TAIDLAB_ALPHA_FIXED) {
    return set_error(TAIDLAB_ERR_INVALID_PARAMETER, "unknown alpha mode");
  }
  return guarded([&] {
    taidlab::SimConfig c;
    c.y0 = copy(y0, n);
    c.epsilon = config->epsilon;
    c.horizon = config->horizon;
    c.mode = config->mode == TAIDLAB_SIM_TAID ? taidlab::SimMode::kTaid
                                              : taidlab::SimMode::kSelfDistill;
    c.alpha_mode = static_cast<taidlab::AlphaMode>(config->alpha_mode);
    c.alpha_value = config->alpha;
    c.continue_after_collapse = config->continue_after_collapse != 0;
    *out = new taidlab_trace{taidlab::run_recursion(spectrum->impl, c)};
  });
}

size_t taidlab_trace_length(const taidlab_trace* trace) {
  return trace == nullptr ? 0 : trace->impl.steps.size();
}

taidlab_status taidlab_trace_step(const taidlab_trace* trace, size_t index, taidlab_sim_step* out) {
  TAIDLAB_REQUIRE_ARG(trace);
  TAIDLAB_REQUIRE_ARG(out);
  if (index >= trace->impl.steps.size()) {
    return set_error(TAIDLAB_ERR_RANGE, "trace step index out of range");
  }
  const taidlab::SimStep& s = trace->impl.steps[index];
  *out = {s.step,       s.lambda,     s.r,          s.norm_y, s.norm_y_tilde,
          s.min_filter, s.max_filter, s.collapsed ? 1 : 0};
  return TAIDLAB_OK;
}

taidlab_status taidlab_trace_y(const taidlab_trace* trace, size_t index, double* out) {
  TAIDLAB_REQUIRE_ARG(trace);
  TAIDLAB_REQUIRE_ARG(out);
  const auto& steps = trace->impl.steps;
  if (index > steps.size()) return set_error(TAIDLAB_ERR_RANGE, "trace y index out of range");
  const std::vector<double>& y = index == steps.size() ? trace->impl.final_y : steps[index].y;
  std::copy(y.begin(), y.end(), out);
  return TAIDLAB_OK;
}

taidlab_status taidlab_trace_r0(const taidlab_trace* trace, double* out) {
  TAIDLAB_REQUIRE_ARG(trace);
  TAIDLAB_REQUIRE_ARG(out);
  *out = trace->impl.r0;
  return TAIDLAB_OK;
}

int taidlab_trace_first_collapse(const taidlab_trace* trace) {
  if (trace == nullptr || !trace->impl.first_collapse) return -1;
  return *trace->impl.first_collapse;
}

void taidlab_trace_destroy(taidlab_trace* trace) { delete trace; }

taidlab_status taidlab_self_distill_safe_steps(double r0, double kappa, double* out) {
  TAIDLAB_REQUIRE_ARG(out);
  return guarded([&] { *out = taidlab::predicted_self_distill_collapse_step(r0, kappa); });
}

taidlab_status taidlab_corollary_initial_norm(int horizon, double kappa, int n, double epsilon,
                                              double* out) {
  TAIDLAB_REQUIRE_ARG(out);
  return guarded([&] { *out = taidlab::corollary_initial_norm(horizon, kappa, n, epsilon); });
}

// ---- Analysis ---------------------------------------------------------------

taidlab_status taidlab_mass_report(const double* student, const double* teacher, size_t vocab,
                                   size_t head_k, double tail_lo_pct, double tail_hi_pct,
                                   double* head_mass, double* tail_mass) {
  TAIDLAB_REQUIRE_ARG(student);
  TAIDLAB_REQUIRE_ARG(teacher);
  return guarded([&] {
    const taidlab::MassReport r = taidlab::mass_report(
        std::span<const double>(student, vocab), std::span<const double>(teacher, vocab), head_k,
        tail_lo_pct, tail_hi_pct);
    if (head_mass != nullptr) *head_mass = r.head_mass;
    if (tail_mass != nullptr) *tail_mass = r.tail_mass;
  });
}

taidlab_status taidlab_dist_stats(const double* dist, size_t vocab, size_t target_index,
                                  double* entropy, double* target_prob) {
  TAIDLAB_REQUIRE_ARG(dist);
  return guarded([&] {
    const taidlab::DistStats s =
        taidlab::dist_stats(std::span<const double>(dist, vocab), target_index);
    if (entropy != nullptr) *entropy = s.entropy;
    if (target_prob != nullptr) *target_prob = s.target_prob;
  });
}

// ---- Experiments ------------------------------------------------------------

void taidlab_run_options_init(taidlab_run_options* options) {
  if (options == nullptr) return;
  *options = {TAIDLAB_RUN_SWEEP, nullptr, 0, 0, 1, 0};
}

int taidlab_run_experiment(const char* config_path, const taidlab_run_options* options,
                           taidlab_run_result* result) {
  taidlab_run_result local{};
  taidlab_run_result& out = result != nullptr ? *result : local;
  out = taidlab_run_result{};
  if (config_path == nullptr || options == nullptr) {
    set_error(TAIDLAB_ERR_NULL_ARGUMENT, "config_path and options must not be NULL");
    out.exit_code = taidlab::kExitConfigError;
    copy_text(out.message, sizeof(out.message), g_last_error);
    return out.exit_code;
  }
  taidlab::RunOptions opts;
  switch (options->mode) {
    case TAIDLAB_RUN_DISTILL: opts.mode = taidlab::ExperimentMode::kDistill; break;
    case TAIDLAB_RUN_THEORY: opts.mode = taidlab::ExperimentMode::kTheory; break;
    default: opts.mode = taidlab::ExperimentMode::kSweep; break;
  }
  if (options->out_dir != nullptr) opts.out_dir = options->out_dir;
  if (options->has_seed) opts.seed = options->seed;
  opts.quiet = options->quiet != 0;
  if (options->threads > 0) opts.threads = options->threads;

  taidlab::ExperimentOutcome outcome;
  try {
    outcome = taidlab::run_experiment_file(config_path, opts);
  } catch (const std::exception& e) {
    outcome.exit_code = taidlab::kExitRunFailure;
    outcome.message = e.what();
  }
  out.exit_code = outcome.exit_code;
  out.runs = outcome.runs;
  out.failed = outcome.failed;
  copy_text(out.out_dir, sizeof(out.out_dir), outcome.out_dir);
  copy_text(out.message, sizeof(out.message), outcome.message);
  if (outcome.exit_code != taidlab::kExitOk) {
    set_error(outcome.exit_code == taidlab::kExitConfigError ? TAIDLAB_ERR_CONFIG
                                                             : TAIDLAB_ERR_RUN_FAILED,
              outcome.message);
  }
  return out.exit_code;
}

void taidlab_analyze_options_init(taidlab_analyze_options* options) {
  if (options == nullptr) return;
  *options = {nullptr, nullptr, nullptr, ".", 10, 80.0, 100.0};
}

taidlab_status taidlab_analyze(const taidlab_analyze_options* options) {
  TAIDLAB_REQUIRE_ARG(options);
  TAIDLAB_REQUIRE_ARG(options->student_path);
  TAIDLAB_REQUIRE_ARG(options->teacher_path);
  TAIDLAB_REQUIRE_ARG(options->corpus_path);
  return guarded([&] {
    taidlab::AnalyzeOptions o;
    o.student_path = options->student_path;
    o.teacher_path = options->teacher_path;
    o.corpus_path = options->corpus_path;
    if (options->out_dir != nullptr) o.out_dir = options->out_dir;
    o.head_k = options->head_k;
    o.tail_lo = options->tail_lo_pct;
    o.tail_hi = options->tail_hi_pct;
    taidlab::analyze_models(o);
  });
}

taidlab_status taidlab_plot(const char* kind, const char* const* csv_paths, size_t n_paths,
                            const char* out_dir, const char* stem) {
  TAIDLAB_REQUIRE_ARG(kind);
  TAIDLAB_REQUIRE_ARG(out_dir);
  TAIDLAB_REQUIRE_ARG(stem);
  if (n_paths > 0) TAIDLAB_REQUIRE_ARG(csv_paths);
  const auto parsed = taidlab::parse_plot_kind(kind);
  if (!parsed) return set_error(TAIDLAB_ERR_INVALID_INPUT, std::string("unknown plot kind '") + kind + "'");
  return guarded([&] {
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < n_paths; ++i) {
      taidlab::require(csv_paths[i] != nullptr, taidlab::ErrorCode::kInvalidInput,
                       "csv path is NULL");
      paths.emplace_back(csv_paths[i]);
    }
    taidlab::plot_emit(*parsed, paths, out_dir, stem);
  });
}

}  // extern "C"
