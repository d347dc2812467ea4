// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "taidlab/error.hpp"
#include "taidlab/reports.hpp"

namespace taidlab {
namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(TAIDLAB_TEST_DATA) + "/golden/" + name, std::ios::binary);
  EXPECT_TRUE(in.good()) << name;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(Golden, StepCsv) {
  const std::vector<StepRecord> records{{0, 0.5, 0.2, 0.25, 0.125, 1.0},
                                        {1, 0.375, 0.2003, 0.1875, 0.09375, 0.75}};
  std::ostringstream out;
  write_step_csv(out, records);
  EXPECT_EQ(out.str(), golden("steps.csv"));
}

TEST(Golden, TraceCsv) {
  SimTrace trace;
  SimStep a;
  a.step = 0;
  a.lambda = 0.25;
  a.r = 4.0;
  a.norm_y = 5.0;
  SimStep b;
  b.step = 1;
  b.lambda = std::nan("");
  b.r = 0.5;
  b.norm_y = 1.5;
  b.collapsed = true;
  trace.steps = {a, b};
  std::ostringstream out;
  write_trace_csv(out, trace);
  EXPECT_EQ(out.str(), golden("trace.csv"));
}

TEST(Golden, TrialCsv) {
  TrialOutcome a;
  a.spec.seed = 11;
  a.spec.n = 8;
  a.spec.horizon = 20;
  a.kappa = 2.5;
  a.r0 = 6.0;
  a.steps_run = 20;
  a.completed = true;
  a.floor_margin = 0.125;
  TrialOutcome b;
  b.spec.seed = 12;
  b.spec.n = 4;
  b.spec.horizon = 10;
  b.spec.mode = SimMode::kSelfDistill;
  b.kappa = 1.0;
  b.r0 = 3.0;
  b.steps_run = 4;
  b.first_collapse = 3;
  const std::vector<TrialOutcome> trials{a, b};
  std::ostringstream out;
  write_trial_csv(out, trials);
  EXPECT_EQ(out.str(), golden("trials.csv"));
}

TEST(Golden, SummaryHeader) {
  EXPECT_EQ(kSummaryCsvHeader,
            "run,objective,teacher_order,teacher_contexts,teacher_params,teacher_eval_kl,eval_kl,"
            "eval_rkl,eval_tvd,head_mass,tail_mass,entropy,target_prob,final_objective,"
            "objective_std,final_t,status");
}

TEST(Csv, RoundTripThroughReader) {
  std::istringstream in(golden("steps.csv"));
  const CsvTable table = read_csv(in);
  ASSERT_EQ(table.columns.size(), 6u);
  EXPECT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.numeric_column("t", "steps.csv"), (std::vector<double>{0.2, 0.2003}));
}

TEST(Csv, MissingColumnIsNamed) {
  std::istringstream in("a,b\n1,2\n");
  const CsvTable table = read_csv(in);
  try {
    table.column("objective", "run.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find("'objective'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("run.csv"), std::string::npos);
  }
}

TEST(Csv, RaggedRowsAndBadCells) {
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(read_csv(ragged), Error);
  std::istringstream text("a\nx\n");
  EXPECT_THROW(read_csv(text).numeric_column("a", "f"), Error);
  EXPECT_THROW(read_csv_file("/nonexistent/file.csv"), Error);
}

TEST(Stats, PopulationStandardDeviation) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(standard_deviation(v), 2.0);
  const std::vector<double> one{3.0};
  EXPECT_EQ(standard_deviation(one), 0.0);
}

}  // namespace
}  // namespace taidlab
