// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "taidlab/taidlab.h"

namespace {

namespace fs = std::filesystem;

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(taidlab_version(), "0.1.0");
  EXPECT_STREQ(taidlab_status_name(TAIDLAB_OK), "ok");
  EXPECT_STRNE(taidlab_status_name(TAIDLAB_ERR_RANGE), taidlab_status_name(TAIDLAB_ERR_IO));
}

TEST(CApi, SoftmaxAndErrors) {
  const double logits[3] = {1.0, 2.0, 3.0};
  double out[3];
  ASSERT_EQ(taidlab_softmax(logits, 3, out), TAIDLAB_OK);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(out[2], std::exp(3.0) / z, 1e-15);

  const double bad[2] = {1.0, NAN};
  EXPECT_EQ(taidlab_softmax(bad, 2, out), TAIDLAB_ERR_INVALID_INPUT);
  EXPECT_GT(std::strlen(taidlab_last_error()), 0u);
  EXPECT_EQ(taidlab_softmax(nullptr, 2, out), TAIDLAB_ERR_NULL_ARGUMENT);

  double inter[3];
  const double teacher[3] = {3.0, 2.0, 1.0};
  ASSERT_EQ(taidlab_interpolate(logits, teacher, 3, 0.5, inter), TAIDLAB_OK);
  for (double p : inter) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(taidlab_interpolate(logits, teacher, 3, 1.5, inter), TAIDLAB_ERR_INVALID_PARAMETER);
}

TEST(CApi, ObjectiveEvaluation) {
  taidlab_objective obj;
  ASSERT_EQ(taidlab_objective_parse("RKL", &obj), TAIDLAB_OK);
  EXPECT_EQ(obj, TAIDLAB_OBJECTIVE_RKL);
  EXPECT_STREQ(taidlab_objective_name(TAIDLAB_OBJECTIVE_TAID), "TAID");
  EXPECT_NE(taidlab_objective_parse("XX", &obj), TAIDLAB_OK);

  // KL of softmax([0, 0]) against softmax([ln 3, 0]) = [0.75, 0.25].
  const double s[2] = {0.0, 0.0};
  const double t[2] = {std::log(3.0), 0.0};
  double value = 0.0;
  double grad[2];
  ASSERT_EQ(taidlab_objective_eval(TAIDLAB_OBJECTIVE_KL, s, t, 1, 2, 0.0, &value, grad), TAIDLAB_OK);
  EXPECT_NEAR(value, 0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-15);
  EXPECT_NEAR(grad[0], -0.25, 1e-15);
  EXPECT_NEAR(grad[1], 0.25, 1e-15);
  EXPECT_EQ(taidlab_objective_eval(TAIDLAB_OBJECTIVE_KL, s, t, 1, 2, 0.0, &value, nullptr), TAIDLAB_OK);
  EXPECT_EQ(taidlab_objective_eval(TAIDLAB_OBJECTIVE_GJSD, s, t, 1, 2, 2.0, &value, grad),
            TAIDLAB_ERR_INVALID_PARAMETER);
  EXPECT_EQ(taidlab_objective_eval(TAIDLAB_OBJECTIVE_KL, s, t, 0, 2, 0.0, &value, grad),
            TAIDLAB_ERR_INVALID_INPUT);
}

TEST(CApi, Scheduler) {
  taidlab_scheduler_config c;
  taidlab_scheduler_config_init(&c);
  c.t_start = 0.4;
  c.total_steps = 10;
  double t = 0.0;
  ASSERT_EQ(taidlab_linear_t(&c, 5, &t), TAIDLAB_OK);
  EXPECT_NEAR(t, 0.7, 1e-15);
  EXPECT_EQ(taidlab_linear_t(&c, 11, &t), TAIDLAB_ERR_RANGE);

  taidlab_scheduler* sched = nullptr;
  ASSERT_EQ(taidlab_scheduler_create(&c, &sched), TAIDLAB_OK);
  double prev = 0.4;
  for (int n = 1; n <= 10; ++n) {
    ASSERT_EQ(taidlab_scheduler_step(sched, 1.0 / n, &t), TAIDLAB_OK);
    EXPECT_GE(t, prev);
    prev = t;
  }
  EXPECT_EQ(t, 1.0);
  double m = 0.0;
  EXPECT_EQ(taidlab_scheduler_momentum(sched, &m), TAIDLAB_OK);
  EXPECT_GT(m, 0.0);
  EXPECT_EQ(taidlab_scheduler_step(sched, -1.0, nullptr), TAIDLAB_ERR_INVALID_INPUT);
  taidlab_scheduler_destroy(sched);
  taidlab_scheduler_destroy(nullptr);

  c.t_start = 2.0;
  EXPECT_NE(taidlab_scheduler_create(&c, &sched), TAIDLAB_OK);
}

TEST(CApi, RecursionIdentityTrace) {
  const double gram[4] = {1.0, 0.0, 0.0, 1.0};
  taidlab_spectrum* spec = nullptr;
  ASSERT_EQ(taidlab_spectrum_create(gram, 2, &spec), TAIDLAB_OK);
  EXPECT_EQ(taidlab_spectrum_size(spec), 2u);
  double kappa = 0.0;
  ASSERT_EQ(taidlab_spectrum_kappa(spec, &kappa), TAIDLAB_OK);
  EXPECT_EQ(kappa, 1.0);

  taidlab_sim_config c;
  taidlab_sim_config_init(&c);
  c.epsilon = 0.25;
  c.horizon = 3;
  const double y0[2] = {3.0, 4.0};
  taidlab_trace* trace = nullptr;
  ASSERT_EQ(taidlab_run_recursion(spec, y0, 2, &c, &trace), TAIDLAB_OK);
  ASSERT_EQ(taidlab_trace_length(trace), 3u);
  taidlab_sim_step step;
  ASSERT_EQ(taidlab_trace_step(trace, 0, &step), TAIDLAB_OK);
  const double crit = std::sqrt(0.5);
  const double lambda0 = crit / (5.0 - crit);
  EXPECT_NEAR(step.lambda, lambda0, 1e-15);
  double y1[2];
  ASSERT_EQ(taidlab_trace_y(trace, 1, y1), TAIDLAB_OK);
  EXPECT_NEAR(y1[0], 3.0 / (1.0 + lambda0), 1e-14);
  EXPECT_EQ(taidlab_trace_y(trace, 4, y1), TAIDLAB_ERR_RANGE);
  EXPECT_EQ(taidlab_trace_first_collapse(trace), -1);
  taidlab_trace_destroy(trace);

  const double y_bad[3] = {1.0, 1.0, 1.0};
  EXPECT_NE(taidlab_run_recursion(spec, y_bad, 3, &c, &trace), TAIDLAB_OK);
  taidlab_spectrum_destroy(spec);

  const double singular[4] = {1.0, 1.0, 1.0, 1.0};
  EXPECT_EQ(taidlab_spectrum_create(singular, 2, &spec), TAIDLAB_ERR_INVALID_KERNEL);
}

TEST(CApi, BoundsAndAnalysis) {
  double out = 0.0;
  ASSERT_EQ(taidlab_self_distill_safe_steps(5.0, 2.0, &out), TAIDLAB_OK);
  EXPECT_EQ(out, 2.0);
  EXPECT_EQ(taidlab_self_distill_safe_steps(0.5, 2.0, &out), TAIDLAB_ERR_INVALID_INPUT);
  ASSERT_EQ(taidlab_corollary_initial_norm(6, 1.0, 1, 1.0, &out), TAIDLAB_OK);
  EXPECT_EQ(out, 4.0);

  std::vector<double> u(100, 0.01);
  double head = 0.0;
  double tail = 0.0;
  ASSERT_EQ(taidlab_mass_report(u.data(), u.data(), 100, 10, 80.0, 100.0, &head, &tail), TAIDLAB_OK);
  EXPECT_NEAR(head, 0.1, 1e-12);
  EXPECT_NEAR(tail, 0.2, 1e-12);
  EXPECT_EQ(taidlab_mass_report(u.data(), u.data(), 100, 100, 80.0, 100.0, &head, &tail),
            TAIDLAB_ERR_RANGE);

  const double p[3] = {0.5, 0.25, 0.25};
  double entropy = 0.0;
  double target = 0.0;
  ASSERT_EQ(taidlab_dist_stats(p, 3, 1, &entropy, &target), TAIDLAB_OK);
  EXPECT_NEAR(entropy, 1.5 * std::log(2.0), 1e-15);
  EXPECT_EQ(target, 0.25);
}

TEST(CApi, RunExperimentAndPlot) {
  const fs::path dir = fs::temp_directory_path() / "taidlab_capi_run";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "x.cfg";
  std::ofstream(cfg) << "corpus.vocab = 5\ncorpus.length = 100\ncorpus.sequences = 1\n"
                        "train.steps = 10\ntrain.batch_size = 4\neval.positions = 20\n"
                        "analysis.head_k = 1\nsweep.o.train.objective = TAID, KL\n";
  taidlab_run_options options;
  taidlab_run_options_init(&options);
  const std::string out = (dir / "out").string();
  options.out_dir = out.c_str();
  options.threads = 1;
  taidlab_run_result result;
  ASSERT_EQ(taidlab_run_experiment(cfg.string().c_str(), &options, &result), 0) << result.message;
  EXPECT_EQ(result.runs, 2u);
  EXPECT_EQ(result.failed, 0u);
  EXPECT_STREQ(result.out_dir, out.c_str());

  const std::string summary = (dir / "out" / "summary.csv").string();
  const char* paths[] = {summary.c_str()};
  const std::string plots = (dir / "plots").string();
  ASSERT_EQ(taidlab_plot("MASS_BARS", paths, 1, plots.c_str(), "mass"), TAIDLAB_OK) << taidlab_last_error();
  EXPECT_TRUE(fs::exists(dir / "plots" / "mass.svg"));
  EXPECT_TRUE(fs::exists(dir / "plots" / "mass.py"));
  EXPECT_EQ(taidlab_plot("PIE", paths, 1, plots.c_str(), "mass"), TAIDLAB_ERR_INVALID_INPUT);

  std::ofstream(cfg) << "train.stepz = 1\n";
  EXPECT_EQ(taidlab_run_experiment(cfg.string().c_str(), &options, &result), 2);
  EXPECT_NE(std::string(result.message).find("train.stepz"), std::string::npos);
  fs::remove_all(dir);
}

}  // namespace
