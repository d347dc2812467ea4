// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

// Command-line front end over the C interface.

#include <cstdio>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taidlab/taidlab.h"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRunFailure = 3;

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config, "Experiment config file")->required();
  cmd->add_option("--seed", flags.seed, "Override the config seed");
  cmd->add_option("--out", flags.out, "Output directory (default: output.dir)");
  cmd->add_flag("--quiet", flags.quiet, "Suppress progress output");
}

int run(taidlab_run_mode mode, const RunFlags& flags) {
  taidlab_run_options options;
  taidlab_run_options_init(&options);
  options.mode = mode;
  options.out_dir = flags.out.empty() ? nullptr : flags.out.c_str();
  options.has_seed = flags.seed.has_value();
  options.seed = flags.seed.value_or(0);
  options.quiet = flags.quiet;
  taidlab_run_result result;
  const int code = taidlab_run_experiment(flags.config.c_str(), &options, &result);
  if (code != 0) {
    std::fprintf(stderr, "error: %s\n", result.message);
  } else if (!flags.quiet) {
    std::printf("%s in %s\n", result.message, result.out_dir);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpolated distillation experiments on toy models"};
  app.set_version_flag("--version", std::string(taidlab_version()));
  app.require_subcommand(1);

  RunFlags distill_flags, sweep_flags, theory_flags;
  auto* distill = app.add_subcommand("distill", "Train one student from the base config");
  add_run_flags(distill, distill_flags);
  auto* sweep = app.add_subcommand("sweep", "Run every point of the config's sweep axes");
  add_run_flags(sweep, sweep_flags);
  auto* theory = app.add_subcommand("theory", "Run the regression recursion simulator");
  add_run_flags(theory, theory_flags);

  taidlab_analyze_options analyze_opts;
  taidlab_analyze_options_init(&analyze_opts);
  std::string student, teacher, corpus, analyze_out = ".";
  bool analyze_quiet = false;
  auto* analyze = app.add_subcommand("analyze", "Head/tail mass and entropy of a saved student");
  analyze->add_option("--student", student, "Student model file")->required();
  analyze->add_option("--teacher", teacher, "Teacher model file")->required();
  analyze->add_option("--corpus", corpus, "Corpus file")->required();
  analyze->add_option("--out", analyze_out, "Output directory");
  analyze->add_option("--head-k", analyze_opts.head_k, "Teacher top-k tokens counted as head");
  analyze->add_option("--tail-lo", analyze_opts.tail_lo_pct, "Tail band start percentile");
  analyze->add_option("--tail-hi", analyze_opts.tail_hi_pct, "Tail band end percentile");
  analyze->add_flag("--quiet", analyze_quiet, "Suppress progress output");

  std::string plot_kind, plot_out = ".", plot_name;
  std::vector<std::string> plot_csv;
  bool plot_quiet = false;
  auto* plot = app.add_subcommand("plot", "Emit an SVG and a matplotlib script for a panel");
  plot->add_option("--kind", plot_kind, "T_TRACE, LOSS_VARIANCE, CAPACITY_CURVE or MASS_BARS")
      ->required()
      ->check(CLI::IsMember({"T_TRACE", "LOSS_VARIANCE", "CAPACITY_CURVE", "MASS_BARS"}));
  plot->add_option("csv", plot_csv, "Input CSV files")->required();
  plot->add_option("--out", plot_out, "Output directory");
  plot->add_option("--name", plot_name, "Output file stem (default: lowercase kind)");
  plot->add_flag("--quiet", plot_quiet, "Suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (*distill) return run(TAIDLAB_RUN_DISTILL, distill_flags);
  if (*sweep) return run(TAIDLAB_RUN_SWEEP, sweep_flags);
  if (*theory) return run(TAIDLAB_RUN_THEORY, theory_flags);

  if (*analyze) {
    analyze_opts.student_path = student.c_str();
    analyze_opts.teacher_path = teacher.c_str();
    analyze_opts.corpus_path = corpus.c_str();
    analyze_opts.out_dir = analyze_out.c_str();
    const taidlab_status status = taidlab_analyze(&analyze_opts);
    if (status != TAIDLAB_OK) {
      std::fprintf(stderr, "error: %s\n", taidlab_last_error());
      return status == TAIDLAB_ERR_IO || status == TAIDLAB_ERR_RUN_FAILED ? kExitRunFailure
                                                                          : kExitConfigError;
    }
    if (!analyze_quiet) std::printf("wrote %s/analysis.json\n", analyze_out.c_str());
    return 0;
  }

  if (plot_name.empty()) {
    for (char c : plot_kind) plot_name += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  }
  std::vector<const char*> paths;
  for (const std::string& p : plot_csv) paths.push_back(p.c_str());
  const taidlab_status status = taidlab_plot(plot_kind.c_str(), paths.data(), paths.size(),
                                             plot_out.c_str(), plot_name.c_str());
  if (status != TAIDLAB_OK) {
    std::fprintf(stderr, "error: %s\n", taidlab_last_error());
    return status == TAIDLAB_ERR_IO ? kExitRunFailure : kExitConfigError;
  }
  if (!plot_quiet) {
    std::printf("wrote %s/%s.svg and %s/%s.py\n", plot_out.c_str(), plot_name.c_str(),
                plot_out.c_str(), plot_name.c_str());
  }
  return 0;
}
