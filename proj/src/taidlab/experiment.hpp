// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taidlab/analysis.hpp"
#include "taidlab/config.hpp"
#include "taidlab/models.hpp"
#include "taidlab/theory.hpp"
#include "taidlab/trainer.hpp"

namespace taidlab {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

// Exit statuses shared by the runner and the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRunFailure = 3;

/// Everything one distillation run needs, resolved from a config view.
struct DistillRunSpec {
  std::uint64_t seed = 0;

  std::string corpus_source = "zipf";
  std::size_t vocab = 16;
  int corpus_order = 1;
  double zipf_s = 1.1;
  double noise = 1.0;
  std::size_t corpus_length = 2000;
  std::size_t corpus_sequences = 8;
  BimodalSpec bimodal;

  std::string teacher_kind = "fitted";
  int teacher_order = 1;
  std::size_t teacher_contexts = 0;
  double teacher_smoothing = 0.1;

  std::string student_kind = "tabular";
  int student_order = 1;
  std::size_t student_contexts = 0;
  std::size_t student_buckets = 0;
  std::string student_init = "zero";
  double student_init_scale = 0.01;

  TrainConfig train;

  std::string eval_reference = "source";
  std::size_t eval_positions = 2000;
  std::size_t eval_length = 2000;
  std::size_t eval_sequences = 4;
  std::size_t head_k = 10;
  double tail_lo = 80.0;
  double tail_hi = 100.0;

  /// Throws Error on any out-of-range field.
  void validate() const;
};

DistillRunSpec resolve_distill(const ValidatedConfig::View& view);

struct DistillArtifacts {
  MarkovSource source;
  Corpus corpus;
  Corpus eval_corpus;
  TabularModel teacher;
  StudentModel initial_student;
};

DistillArtifacts build_distill_artifacts(const DistillRunSpec& spec);

struct DistillOutcome {
  TrainResult result;
  EvalSummary eval;          // student vs eval reference
  EvalSummary teacher_eval;  // teacher vs eval reference
  MassReport mass;           // student vs teacher
  DistStats stats;
  std::size_t teacher_params = 0;
};

/// Builds data and models, trains and evaluates. Throws TrainingDiverged on a
/// non-finite step.
DistillOutcome execute_distill(const DistillRunSpec& spec);
DistillOutcome execute_distill(const DistillRunSpec& spec, const DistillArtifacts& artifacts);

struct TheoryRunSpec {
  std::uint64_t seed = 0;
  // Trial suite (used when y0 is empty).
  int trials = 200;
  TrialRanges ranges;
  std::optional<double> corollary_factor;
  bool write_traces = false;
  // Single explicit run.
  std::vector<double> y0;
  std::string gram = "identity";
  double bandwidth = 0.5;
  double kappa = 2.0;
  int horizon = 10;
  double epsilon = 0.05;
  bool continue_after_collapse = false;

  SimMode mode = SimMode::kTaid;
  AlphaMode alpha_mode = AlphaMode::kDMin;
  double alpha = 0.0;

  void validate() const;
};

TheoryRunSpec resolve_theory(const ValidatedConfig::View& view);

/// Spectrum for a single explicit theory run.
GramSpectrum theory_spectrum(const TheoryRunSpec& spec);
SimConfig theory_sim_config(const TheoryRunSpec& spec);
std::vector<TrialOutcome> run_trials(const TheoryRunSpec& spec);

enum class ExperimentMode { kDistill, kSweep, kTheory };

struct RunOptions {
  ExperimentMode mode = ExperimentMode::kSweep;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = true;
  std::optional<unsigned> threads;  // defaults to TAIDLAB_THREADS, then hardware
};

struct ExperimentOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::string out_dir;
  std::size_t runs = 0;
  std::size_t failed = 0;
};

/// Validates the whole config (every sweep point) before running anything,
/// then executes runs in a worker pool and writes per-run files plus
/// manifest.json and config.cfg into the output directory.
ExperimentOutcome run_experiment(const ConfigDocument& doc, const RunOptions& options);
ExperimentOutcome run_experiment_file(const std::string& config_path, const RunOptions& options);

/// Worker count from TAIDLAB_THREADS (when set and positive) else hardware.
unsigned default_worker_count();

struct AnalyzeOptions {
  std::string student_path;
  std::string teacher_path;
  std::string corpus_path;
  std::string out_dir = ".";
  std::size_t head_k = 10;
  double tail_lo = 80.0;
  double tail_hi = 100.0;
};

/// Mass and entropy statistics of a saved student against a saved teacher
/// over every position of a saved corpus; writes analysis.json.
std::string analyze_models(const AnalyzeOptions& options);

}  // namespace taidlab
