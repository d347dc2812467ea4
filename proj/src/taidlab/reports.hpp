// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taidlab/theory.hpp"
#include "taidlab/trainer.hpp"

namespace taidlab {

// Column lists are part of the public file contract.
inline constexpr std::string_view kStepCsvHeader =
    "step,objective,t,kl_to_teacher,rkl_to_teacher,grad_norm";
inline constexpr std::string_view kTraceCsvHeader = "step,lambda,r,norm_y,collapsed";
inline constexpr std::string_view kTrialCsvHeader =
    "trial,seed,n,horizon,kappa,r0,steps_run,first_collapse,completed,floor_ok,late_ok,"
    "guarantee_ok,eventual_ok,filter_ok,floor_margin,passed";
inline constexpr std::string_view kSummaryCsvHeader =
    "run,objective,teacher_order,teacher_contexts,teacher_params,teacher_eval_kl,eval_kl,eval_rkl,"
    "eval_tvd,head_mass,tail_mass,entropy,target_prob,final_objective,objective_std,final_t,status";

void write_step_csv(std::ostream& out, std::span<const StepRecord> records);
void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_trial_csv(std::ostream& out, std::span<const TrialOutcome> trials);

/// Header row plus string cells.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name`, throwing Error(kInvalidInput) naming the missing column.
  std::size_t column(std::string_view name, std::string_view source) const;
  std::vector<double> numeric_column(std::string_view name, std::string_view source) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Population standard deviation.
double standard_deviation(std::span<const double> values);

}  // namespace taidlab
