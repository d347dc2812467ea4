// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "taidlab/error.hpp"
#include "taidlab/reports.hpp"
#include "taidlab/rng.hpp"
#include "taidlab/text.hpp"

namespace taidlab {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Seed streams for the pieces of one distillation run.
enum : std::uint64_t {
  kStreamCorpus = 1,
  kStreamEvalCorpus = 2,
  kStreamTeacherHash = 3,
  kStreamStudentHash = 4,
  kStreamStudentInit = 5,
  kStreamTrain = 6,
  kStreamEvalPositions = 7,
  kStreamTrials = 8,
  kStreamGram = 9,
};

std::size_t as_size(const ValidatedConfig::View& view, std::string_view key, std::int64_t min) {
  const std::int64_t v = view.integer(key);
  require(v >= min, ErrorCode::kConfig,
          view.where(key) + "must be >= " + std::to_string(min) + ", got " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

int as_int(const ValidatedConfig::View& view, std::string_view key, std::int64_t min,
           std::int64_t max) {
  const std::int64_t v = view.integer(key);
  require(v >= min && v <= max, ErrorCode::kConfig,
          view.where(key) + "must be in [" + std::to_string(min) + ", " + std::to_string(max) +
              "], got " + std::to_string(v));
  return static_cast<int>(v);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIo, "failed writing " + path.string());
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

Json eval_json(const EvalSummary& e) {
  return Json{{"mean_kl", e.mean_kl}, {"mean_rkl", e.mean_rkl}, {"mean_tvd", e.mean_tvd}};
}

StudentModel make_student(const DistillRunSpec& spec) {
  StudentModel student = [&]() -> StudentModel {
    if (spec.student_kind == "linear") {
      LinearFeatureMap map{spec.student_order, spec.student_buckets,
                           derive_seed(spec.seed, kStreamStudentHash)};
      return LinearModel(spec.vocab, map);
    }
    return TabularModel(spec.vocab, spec.student_order, spec.student_contexts,
                        derive_seed(spec.seed, kStreamStudentHash));
  }();
  if (spec.student_init == "random") {
    Rng rng(derive_seed(spec.seed, kStreamStudentInit));
    Matrix& params = std::holds_alternative<TabularModel>(student)
                         ? std::get<TabularModel>(student).logits()
                         : std::get<LinearModel>(student).weights();
    for (double& x : params.data()) x = spec.student_init_scale * rng.normal();
  }
  return student;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distillation runs

void DistillRunSpec::validate() const {
  require(vocab >= 2, ErrorCode::kConfig, "corpus.vocab must be >= 2");
  require(corpus_length >= 1 && corpus_sequences >= 1, ErrorCode::kConfig,
          "corpus.length and corpus.sequences must be >= 1");
  require(zipf_s > 0.0, ErrorCode::kConfig, "corpus.zipf_s must be > 0");
  require(noise >= 0.0, ErrorCode::kConfig, "corpus.noise must be >= 0");
  require(teacher_smoothing > 0.0, ErrorCode::kConfig, "teacher.smoothing must be > 0");
  require(eval_positions >= 1, ErrorCode::kConfig, "eval.positions must be >= 1");
  require(head_k < vocab, ErrorCode::kConfig, "analysis.head_k must be < corpus.vocab");
  require(tail_lo >= 0.0 && tail_lo < tail_hi && tail_hi <= 100.0, ErrorCode::kConfig,
          "analysis.tail_lo/tail_hi must satisfy 0 <= lo < hi <= 100");
  if (corpus_source == "bimodal") {
    require(corpus_order == 1, ErrorCode::kConfig, "the bimodal source is order 1");
    require(bimodal.vocab == vocab && bimodal.shared + bimodal.specific < vocab &&
                bimodal.specific >= 1,
            ErrorCode::kConfig, "bimodal.shared + bimodal.specific must be < corpus.vocab");
  }
  train.validate();
  // Model shapes: constructing empty models checks order and table size.
  TabularModel probe_teacher(vocab, teacher_order, teacher_contexts);
  (void)probe_teacher;
  if (student_kind == "tabular") {
    TabularModel probe_student(vocab, student_order, student_contexts);
    (void)probe_student;
  } else {
    LinearModel probe_student(vocab, LinearFeatureMap{student_order, student_buckets, 0});
    (void)probe_student;
  }
  if (teacher_kind == "source") {
    require(teacher_order == corpus_order, ErrorCode::kConfig,
            "teacher.kind = source requires teacher.order == corpus.order");
  }
}

DistillRunSpec resolve_distill(const ValidatedConfig::View& view) {
  DistillRunSpec spec;
  spec.seed = static_cast<std::uint64_t>(as_size(view, "seed", 0));
  spec.corpus_source = view.string("corpus.source");
  spec.vocab = as_size(view, "corpus.vocab", 2);
  spec.corpus_order = as_int(view, "corpus.order", 0, 8);
  spec.zipf_s = view.real("corpus.zipf_s");
  spec.noise = view.real("corpus.noise");
  spec.corpus_length = as_size(view, "corpus.length", 1);
  spec.corpus_sequences = as_size(view, "corpus.sequences", 1);
  spec.bimodal.vocab = spec.vocab;
  spec.bimodal.shared = as_size(view, "bimodal.shared", 0);
  spec.bimodal.specific = as_size(view, "bimodal.specific", 1);
  spec.bimodal.shared_logit = view.real("bimodal.shared_logit");
  spec.bimodal.specific_logit = view.real("bimodal.specific_logit");
  spec.bimodal.background_logit = view.real("bimodal.background_logit");

  spec.teacher_kind = view.string("teacher.kind");
  spec.teacher_order = as_int(view, "teacher.order", 0, 8);
  spec.teacher_contexts = as_size(view, "teacher.contexts", 0);
  spec.teacher_smoothing = view.real("teacher.smoothing");

  spec.student_kind = view.string("student.kind");
  spec.student_order = as_int(view, "student.order", 0, 8);
  spec.student_contexts = as_size(view, "student.contexts", 0);
  spec.student_buckets = as_size(view, "student.buckets", 0);
  spec.student_init = view.string("student.init");
  spec.student_init_scale = view.real("student.init_scale");

  TrainConfig& train = spec.train;
  train.objective = *parse_train_objective(view.string("train.objective"));
  if (train.objective == TrainObjective::kTaid && !view.boolean("taid.adaptive")) {
    train.objective = TrainObjective::kTaidLinear;
  }
  train.learning_rate = view.real("train.learning_rate");
  train.steps = static_cast<std::int64_t>(as_size(view, "train.steps", 0));
  train.batch_size = as_size(view, "train.batch_size", 1);
  train.objective_lambda = view.real("train.lambda");
  train.optimizer = view.string("train.optimizer") == "adamw" ? OptimizerKind::kAdamW
                                                              : OptimizerKind::kGradientDescent;
  train.weight_decay = view.real("train.weight_decay");
  train.seed = derive_seed(spec.seed, kStreamTrain);
  train.scheduler.alpha = view.real("taid.alpha");
  train.scheduler.beta = view.real("taid.beta");
  train.scheduler.t_start = view.real("taid.t_start");
  train.scheduler.t_end = view.real("taid.t_end");
  train.scheduler.epsilon = view.real("taid.epsilon");
  train.scheduler.adaptive = view.boolean("taid.adaptive");

  spec.eval_reference = view.string("eval.reference");
  spec.eval_positions = as_size(view, "eval.positions", 1);
  spec.eval_length = as_size(view, "eval.length", 1);
  spec.eval_sequences = as_size(view, "eval.sequences", 1);
  spec.head_k = as_size(view, "analysis.head_k", 0);
  spec.tail_lo = view.real("analysis.tail_lo");
  spec.tail_hi = view.real("analysis.tail_hi");
  return spec;
}

DistillArtifacts build_distill_artifacts(const DistillRunSpec& spec) {
  MarkovSource source =
      spec.corpus_source == "bimodal"
          ? make_bimodal_source(spec.seed, spec.bimodal)
          : make_zipf_source(spec.seed, spec.vocab, spec.corpus_order, spec.zipf_s, spec.noise);
  Corpus corpus = sample_corpus(source, derive_seed(spec.seed, kStreamCorpus), spec.corpus_length,
                                spec.corpus_sequences);
  Corpus eval_corpus = sample_corpus(source, derive_seed(spec.seed, kStreamEvalCorpus),
                                     spec.eval_length, spec.eval_sequences);
  TabularModel teacher =
      spec.teacher_kind == "source"
          ? source.truth()
          : fit_teacher(corpus, spec.vocab, spec.teacher_order, spec.teacher_smoothing,
                        spec.teacher_contexts, derive_seed(spec.seed, kStreamTeacherHash));
  StudentModel student = make_student(spec);
  return DistillArtifacts{std::move(source), std::move(corpus), std::move(eval_corpus),
                          std::move(teacher), std::move(student)};
}

DistillOutcome execute_distill(const DistillRunSpec& spec) {
  return execute_distill(spec, build_distill_artifacts(spec));
}

DistillOutcome execute_distill(const DistillRunSpec& spec, const DistillArtifacts& artifacts) {
  DistillOutcome out{train(artifacts.teacher, artifacts.initial_student, artifacts.corpus,
                           spec.train),
                     {}, {}, {}, {}, artifacts.teacher.parameter_count()};
  const std::vector<Position> positions = sample_positions(
      artifacts.eval_corpus, spec.eval_positions, derive_seed(spec.seed, kStreamEvalPositions));
  const auto histories = histories_at(artifacts.eval_corpus, positions);
  const TabularModel& reference =
      spec.eval_reference == "teacher" ? artifacts.teacher : artifacts.source.truth();
  out.eval = evaluate(out.result.student, reference, histories);
  out.teacher_eval = evaluate(StudentModel(artifacts.teacher), reference, histories);
  out.mass = mean_mass_report(out.result.student, artifacts.teacher, histories, spec.head_k,
                              spec.tail_lo, spec.tail_hi);
  out.stats = mean_dist_stats(out.result.student, artifacts.eval_corpus, positions);
  return out;
}

// ---------------------------------------------------------------------------
// Theory runs

void TheoryRunSpec::validate() const {
  require(epsilon > 0.0, ErrorCode::kConfig, "theory.epsilon must be > 0");
  if (!y0.empty()) {
    require(horizon >= 1, ErrorCode::kConfig, "theory.horizon must be >= 1");
    const GramSpectrum spectrum = theory_spectrum(*this);
    theory_sim_config(*this).validate(spectrum);
    return;
  }
  require(trials >= 0, ErrorCode::kConfig, "theory.trials must be >= 0");
  require(ranges.n_min >= 1 && ranges.n_min <= ranges.n_max && ranges.n_max <= 512,
          ErrorCode::kConfig, "theory.n_min/n_max must satisfy 1 <= min <= max <= 512");
  require(ranges.kappa_min >= 1.0 && ranges.kappa_min <= ranges.kappa_max, ErrorCode::kConfig,
          "theory.kappa_min/kappa_max must satisfy 1 <= min <= max");
  require(ranges.horizon_min >= 1 && ranges.horizon_min <= ranges.horizon_max, ErrorCode::kConfig,
          "theory.t_min/t_max must satisfy 1 <= min <= max");
  require(ranges.r0_min > 1.0 && ranges.r0_min <= ranges.r0_max, ErrorCode::kConfig,
          "theory.r0_min/r0_max must satisfy 1 < min <= max");
  require(!corollary_factor || *corollary_factor > 0.0, ErrorCode::kConfig,
          "theory.corollary_factor must be > 0");
  require(alpha_mode != AlphaMode::kFixed, ErrorCode::kConfig,
          "theory.alpha_mode = FIXED needs an explicit theory.y0 run (random spectra vary)");
}

TheoryRunSpec resolve_theory(const ValidatedConfig::View& view) {
  TheoryRunSpec spec;
  spec.seed = static_cast<std::uint64_t>(as_size(view, "seed", 0));
  spec.trials = as_int(view, "theory.trials", 0, 1000000);
  spec.ranges.n_min = as_int(view, "theory.n_min", 1, 512);
  spec.ranges.n_max = as_int(view, "theory.n_max", 1, 512);
  spec.ranges.kappa_min = view.real("theory.kappa_min");
  spec.ranges.kappa_max = view.real("theory.kappa_max");
  spec.ranges.horizon_min = as_int(view, "theory.t_min", 1, 1000000);
  spec.ranges.horizon_max = as_int(view, "theory.t_max", 1, 1000000);
  spec.ranges.r0_min = view.real("theory.r0_min");
  spec.ranges.r0_max = view.real("theory.r0_max");
  spec.ranges.epsilon = view.real("theory.epsilon");
  const double factor = view.real("theory.corollary_factor");
  if (factor != 0.0) spec.corollary_factor = factor;
  spec.write_traces = view.boolean("theory.write_traces");
  spec.y0 = view.real_list("theory.y0");
  spec.gram = view.string("theory.gram");
  spec.bandwidth = view.real("theory.bandwidth");
  spec.kappa = view.real("theory.kappa");
  spec.horizon = as_int(view, "theory.horizon", 1, 1000000);
  spec.epsilon = spec.ranges.epsilon;
  spec.continue_after_collapse = view.boolean("theory.continue_after_collapse");
  spec.mode = *parse_sim_mode(view.string("theory.mode"));
  spec.alpha_mode = *parse_alpha_mode(view.string("theory.alpha_mode"));
  spec.alpha = view.real("theory.alpha");
  return spec;
}

GramSpectrum theory_spectrum(const TheoryRunSpec& spec) {
  const int n = static_cast<int>(spec.y0.size());
  require(n >= 1, ErrorCode::kConfig, "theory.y0 must not be empty for an explicit run");
  if (spec.gram == "identity") {
    return spectrum_from_gram(Matrix::identity(static_cast<std::size_t>(n)));
  }
  if (spec.gram == "random") {
    require(spec.kappa >= 1.0, ErrorCode::kConfig, "theory.kappa must be >= 1");
    return spectrum_from_gram(random_gram(derive_seed(spec.seed, kStreamGram), n, spec.kappa));
  }
  // RBF over seeded points in the unit interval.
  Rng rng(derive_seed(spec.seed, kStreamGram));
  std::vector<std::vector<double>> points(static_cast<std::size_t>(n));
  for (auto& p : points) p = {rng.uniform()};
  return gram_from_kernel(points, Kernel::rbf(spec.bandwidth));
}

SimConfig theory_sim_config(const TheoryRunSpec& spec) {
  SimConfig config;
  config.y0 = spec.y0;
  config.epsilon = spec.epsilon;
  config.horizon = spec.horizon;
  config.alpha_mode = spec.alpha_mode;
  config.alpha_value = spec.alpha;
  config.mode = spec.mode;
  config.continue_after_collapse = spec.continue_after_collapse;
  return config;
}

std::vector<TrialOutcome> run_trials(const TheoryRunSpec& spec) {
  std::vector<TrialOutcome> out;
  out.reserve(static_cast<std::size_t>(spec.trials));
  for (int i = 0; i < spec.trials; ++i) {
    const std::uint64_t seed = derive_seed(derive_seed(spec.seed, kStreamTrials), static_cast<std::uint64_t>(i));
    TrialSpec trial = random_trial(seed, spec.ranges, spec.mode, spec.alpha_mode, spec.corollary_factor);
    out.push_back(run_trial(trial));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runner

unsigned default_worker_count() {
  if (const char* env = std::getenv("TAIDLAB_THREADS")) {
    if (const auto v = parse_int(env); v && *v > 0) return static_cast<unsigned>(*v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct PlannedRun {
  std::string id;
  std::map<std::string, std::string> overrides;
  std::optional<DistillRunSpec> distill;
  std::optional<TheoryRunSpec> theory;
};

struct RunRecord {
  std::string status = "ok";
  std::string failure;
  std::vector<std::string> files;
  Json metrics = Json::object();
  std::string summary_row;
};

std::string run_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "run_%03zu", index);
  return buf;
}

RunRecord execute_distill_run(const PlannedRun& run, const fs::path& out_dir, bool save_models) {
  RunRecord record;
  const DistillRunSpec& spec = *run.distill;
  const DistillArtifacts artifacts = build_distill_artifacts(spec);
  const std::string csv_name = run.id + ".csv";
  try {
    const DistillOutcome outcome = execute_distill(spec, artifacts);
    const auto& records = outcome.result.records;
    write_text(out_dir / csv_name, render([&](std::ostream& o) { write_step_csv(o, records); }));
    record.files.push_back(csv_name);
    if (save_models) {
      for (const auto& [suffix, writer] :
           std::vector<std::pair<std::string, std::function<void(std::ostream&)>>>{
               {".student.tlm", [&](std::ostream& o) { save_model(outcome.result.student, o); }},
               {".teacher.tlm", [&](std::ostream& o) { save_model(StudentModel(artifacts.teacher), o); }},
               {".eval.tlc", [&](std::ostream& o) { save_corpus(artifacts.eval_corpus, o); }}}) {
        write_text(out_dir / (run.id + suffix), render(writer));
        record.files.push_back(run.id + suffix);
      }
    }
    std::vector<double> objective;
    for (const auto& r : records) objective.push_back(r.objective);
    const double objective_std = standard_deviation(objective);
    const double final_objective = records.empty() ? 0.0 : records.back().objective;
    const double final_t = records.empty() ? 1.0 : records.back().t;
    record.metrics = Json{
        {"objective", train_objective_name(spec.train.objective)},
        {"teacher_params", outcome.teacher_params},
        {"teacher_eval", eval_json(outcome.teacher_eval)},
        {"eval", eval_json(outcome.eval)},
        {"head_mass", outcome.mass.head_mass},
        {"tail_mass", outcome.mass.tail_mass},
        {"entropy", outcome.stats.entropy},
        {"target_prob", outcome.stats.target_prob},
        {"final_objective", final_objective},
        {"objective_std", objective_std},
        {"final_t", final_t},
    };
    record.summary_row =
        run.id + "," + std::string(train_objective_name(spec.train.objective)) + "," +
        std::to_string(spec.teacher_order) + "," + std::to_string(artifacts.teacher.contexts()) +
        "," + std::to_string(outcome.teacher_params) + "," +
        format_double(outcome.teacher_eval.mean_kl) + "," + format_double(outcome.eval.mean_kl) +
        "," + format_double(outcome.eval.mean_rkl) + "," + format_double(outcome.eval.mean_tvd) +
        "," + format_double(outcome.mass.head_mass) + "," + format_double(outcome.mass.tail_mass) +
        "," + format_double(outcome.stats.entropy) + "," + format_double(outcome.stats.target_prob) +
        "," + format_double(final_objective) + "," + format_double(objective_std) + "," +
        format_double(final_t) + ",ok";
  } catch (const TrainingDiverged& diverged) {
    write_text(out_dir / csv_name,
               render([&](std::ostream& o) { write_step_csv(o, diverged.partial_records()); }));
    write_text(out_dir / (run.id + ".FAILED"), std::string(diverged.what()) + "\n");
    record.files = {csv_name, run.id + ".FAILED"};
    record.status = "failed";
    record.failure = diverged.what();
    record.metrics = Json{{"failed_step", diverged.step()}};
    record.summary_row = run.id + "," + std::string(train_objective_name(spec.train.objective)) +
                         "," + std::to_string(spec.teacher_order) + ",,,,,,,,,,,,,,failed";
  }
  return record;
}

Json theory_header(const TheoryRunSpec& spec, std::size_t n, double kappa) {
  return Json{{"N", n},
              {"epsilon", spec.epsilon},
              {"T", spec.horizon},
              {"kappa", kappa},
              {"mode", sim_mode_name(spec.mode)},
              {"alpha_mode", alpha_mode_name(spec.alpha_mode)},
              {"seed", spec.seed}};
}

RunRecord execute_theory_run(const PlannedRun& run, const fs::path& out_dir) {
  RunRecord record;
  const TheoryRunSpec& spec = *run.theory;
  if (!spec.y0.empty()) {
    const GramSpectrum spectrum = theory_spectrum(spec);
    const SimTrace trace = run_recursion(spectrum, theory_sim_config(spec));
    write_text(out_dir / (run.id + ".trace.csv"),
               render([&](std::ostream& o) { write_trace_csv(o, trace); }));
    write_text(out_dir / (run.id + ".trace.json"),
               theory_header(spec, spectrum.size(), spectrum.kappa()).dump(2) + "\n");
    record.files = {run.id + ".trace.csv", run.id + ".trace.json"};
    record.metrics = Json{{"r0", trace.r0},
                          {"steps", trace.steps.size()},
                          {"first_collapse", trace.first_collapse ? Json(*trace.first_collapse) : Json()},
                          {"completed", trace.completed(spec.horizon)},
                          {"self_distill_safe_steps",
                           predicted_self_distill_collapse_step(trace.r0, spectrum.kappa())},
                          {"corollary_initial_norm",
                           corollary_initial_norm(spec.horizon, spectrum.kappa(),
                                                  static_cast<int>(spectrum.size()), spec.epsilon)}};
    return record;
  }

  const std::vector<TrialOutcome> trials = run_trials(spec);
  write_text(out_dir / (run.id + ".trials.csv"),
             render([&](std::ostream& o) { write_trial_csv(o, trials); }));
  record.files.push_back(run.id + ".trials.csv");
  std::size_t passed = 0;
  std::size_t completed = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    passed += trials[i].passed();
    completed += trials[i].completed;
    if (!spec.write_traces) continue;
    const TrialOutcome& t = trials[i];
    TheoryRunSpec single = spec;
    single.horizon = t.spec.horizon;
    single.epsilon = t.spec.epsilon;
    single.seed = t.spec.seed;
    const std::string stem = run.id + ".trial_" + std::to_string(i);
    SimTrace trace;
    run_trial(t.spec, &trace);
    write_text(out_dir / (stem + ".trace.csv"),
               render([&](std::ostream& o) { write_trace_csv(o, trace); }));
    write_text(out_dir / (stem + ".trace.json"),
               theory_header(single, static_cast<std::size_t>(t.spec.n), t.kappa).dump(2) + "\n");
    record.files.push_back(stem + ".trace.csv");
    record.files.push_back(stem + ".trace.json");
  }
  record.metrics = Json{{"trials", trials.size()},
                        {"passed", passed},
                        {"failed", trials.size() - passed},
                        {"completed", completed},
                        {"mode", sim_mode_name(spec.mode)},
                        {"alpha_mode", alpha_mode_name(spec.alpha_mode)}};
  if (passed != trials.size()) {
    record.status = "failed";
    record.failure = std::to_string(trials.size() - passed) + " of " +
                     std::to_string(trials.size()) + " trials violated a checked property";
    write_text(out_dir / (run.id + ".FAILED"), record.failure + "\n");
    record.files.push_back(run.id + ".FAILED");
  }
  return record;
}

}  // namespace

ExperimentOutcome run_experiment(const ConfigDocument& input, const RunOptions& options) {
  ExperimentOutcome outcome;
  ConfigDocument doc = input;
  if (options.seed) doc.set("seed", std::to_string(*options.seed));

  std::vector<PlannedRun> plan;
  std::string kind;
  fs::path out_dir;
  bool save_models = false;
  std::string name;
  std::uint64_t base_seed = 0;
  try {
    const ValidatedConfig config(doc);
    const auto base = config.view();
    kind = base.string("experiment.kind");
    name = base.string("experiment.name");
    out_dir = options.out_dir ? fs::path(*options.out_dir) : fs::path(base.string("output.dir"));
    save_models = base.boolean("output.save_models");
    base_seed = static_cast<std::uint64_t>(as_size(base, "seed", 0));
    if (options.mode == ExperimentMode::kDistill) {
      require(kind == "distill", ErrorCode::kConfig,
              doc.source_name() + ": 'distill' needs experiment.kind = distill");
    } else if (options.mode == ExperimentMode::kTheory) {
      require(kind == "theory", ErrorCode::kConfig,
              doc.source_name() + ": 'theory' needs experiment.kind = theory");
    }
    std::vector<std::map<std::string, std::string>> points;
    if (options.mode == ExperimentMode::kDistill) {
      if (!config.axes().empty() && !options.quiet) {
        std::cerr << "note: distill runs the base config; sweep axes are ignored\n";
      }
      points.emplace_back();
    } else {
      points = config.expand();
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      PlannedRun run{run_id(i), points[i], std::nullopt, std::nullopt};
      const auto view = config.view(&run.overrides);
      if (kind == "distill") {
        run.distill = resolve_distill(view);
        run.distill->validate();
      } else {
        run.theory = resolve_theory(view);
        run.theory->validate();
      }
      plan.push_back(std::move(run));
    }
  } catch (const Error& e) {
    outcome.exit_code = kExitConfigError;
    outcome.message = e.what();
    return outcome;
  }

  // The stored copy omits output.dir so identical experiments hash identically
  // wherever they are written.
  ConfigDocument stored = doc;
  stored.erase("output.dir");
  const std::string canonical = stored.canonical_text();

  try {
    fs::create_directories(out_dir);
    write_text(out_dir / "config.cfg", canonical);
  } catch (const std::exception& e) {
    outcome.exit_code = kExitRunFailure;
    outcome.message = std::string("cannot prepare output directory: ") + e.what();
    return outcome;
  }
  outcome.out_dir = out_dir.string();
  outcome.runs = plan.size();

  std::vector<RunRecord> records(plan.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      try {
        records[i] = plan[i].distill ? execute_distill_run(plan[i], out_dir, save_models)
                                     : execute_theory_run(plan[i], out_dir);
      } catch (const std::exception& e) {
        records[i].status = "failed";
        records[i].failure = e.what();
        try {
          write_text(out_dir / (plan[i].id + ".FAILED"), std::string(e.what()) + "\n");
          records[i].files.push_back(plan[i].id + ".FAILED");
        } catch (...) {
        }
      }
      if (!options.quiet) {
        std::lock_guard lock(log_mutex);
        std::cerr << plan[i].id << ": " << records[i].status
                  << (records[i].failure.empty() ? "" : " (" + records[i].failure + ")") << '\n';
      }
    }
  };
  const unsigned workers = std::max(
      1u, std::min<unsigned>(options.threads.value_or(default_worker_count()),
                             static_cast<unsigned>(std::max<std::size_t>(plan.size(), 1))));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  Json runs = Json::array();
  std::string summary = std::string(kSummaryCsvHeader) + "\n";
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const RunRecord& r = records[i];
    outcome.failed += r.status != "ok";
    Json overrides = Json::object();
    for (const auto& [k, v] : plan[i].overrides) overrides[k] = v;
    Json entry{{"id", plan[i].id}, {"overrides", overrides}, {"status", r.status}, {"files", r.files}};
    if (!r.failure.empty()) entry["failure"] = r.failure;
    entry["metrics"] = r.metrics;
    runs.push_back(std::move(entry));
    if (!r.summary_row.empty()) summary += r.summary_row + "\n";
  }
  Json manifest{{"name", name},
                {"kind", kind},
                {"library_version", kLibraryVersion},
                {"config_file", "config.cfg"},
                {"config_hash", fnv1a_hex(canonical)},
                {"seed", base_seed},
                {"runs", runs},
                {"status", outcome.failed == 0 ? "ok" : "failed"}};
  try {
    if (kind == "distill" && !plan.empty()) write_text(out_dir / "summary.csv", summary);
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    outcome.exit_code = kExitRunFailure;
    outcome.message = e.what();
    return outcome;
  }
  if (outcome.failed > 0) {
    outcome.exit_code = kExitRunFailure;
    outcome.message = std::to_string(outcome.failed) + " of " + std::to_string(plan.size()) +
                      " runs failed; see manifest.json";
  } else {
    outcome.message = std::to_string(plan.size()) + " runs completed";
  }
  return outcome;
}

ExperimentOutcome run_experiment_file(const std::string& config_path, const RunOptions& options) {
  try {
    return run_experiment(ConfigDocument::load(config_path), options);
  } catch (const Error& e) {
    ExperimentOutcome outcome;
    outcome.exit_code = kExitConfigError;
    outcome.message = e.what();
    return outcome;
  }
}

std::string analyze_models(const AnalyzeOptions& options) {
  const StudentModel student = load_model_file(options.student_path);
  const StudentModel teacher_any = load_model_file(options.teacher_path);
  require(std::holds_alternative<TabularModel>(teacher_any), ErrorCode::kInvalidInput,
          "teacher model must be tabular");
  const TabularModel& teacher = std::get<TabularModel>(teacher_any);
  const Corpus corpus = load_corpus_file(options.corpus_path);
  require(corpus.vocab == teacher.vocab() && vocab_of(student) == teacher.vocab(),
          ErrorCode::kDimension, "student, teacher and corpus vocabularies differ");
  const std::vector<Position> positions = all_positions(corpus);
  const auto histories = histories_at(corpus, positions);
  const MassReport mass = mean_mass_report(student, teacher, histories, options.head_k,
                                           options.tail_lo, options.tail_hi);
  const DistStats stats = mean_dist_stats(student, corpus, positions);
  const DistStats teacher_stats = mean_dist_stats(StudentModel(teacher), corpus, positions);
  const EvalSummary divergence = evaluate(student, teacher, histories);
  Json report{{"positions", positions.size()},
              {"head_k", options.head_k},
              {"tail_lo_pct", options.tail_lo},
              {"tail_hi_pct", options.tail_hi},
              {"head_mass", mass.head_mass},
              {"tail_mass", mass.tail_mass},
              {"student_entropy", stats.entropy},
              {"student_target_prob", stats.target_prob},
              {"teacher_entropy", teacher_stats.entropy},
              {"teacher_target_prob", teacher_stats.target_prob},
              {"to_teacher", eval_json(divergence)}};
  fs::create_directories(options.out_dir);
  const fs::path path = fs::path(options.out_dir) / "analysis.json";
  write_text(path, report.dump(2) + "\n");
  return path.string();
}

}  // namespace taidlab
