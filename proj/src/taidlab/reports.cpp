// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/reports.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "taidlab/error.hpp"
#include "taidlab/text.hpp"

namespace taidlab {

void write_step_csv(std::ostream& out, std::span<const StepRecord> records) {
  out << kStepCsvHeader << '\n';
  for (const StepRecord& r : records) {
    out << r.step << ',' << format_double(r.objective) << ',' << format_double(r.t) << ','
        << format_double(r.kl_to_teacher) << ',' << format_double(r.rkl_to_teacher) << ','
        << format_double(r.grad_norm) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const SimStep& s : trace.steps) {
    out << s.step << ',' << format_double(s.lambda) << ',' << format_double(s.r) << ','
        << format_double(s.norm_y) << ',' << (s.collapsed ? 1 : 0) << '\n';
  }
}

void write_trial_csv(std::ostream& out, std::span<const TrialOutcome> trials) {
  out << kTrialCsvHeader << '\n';
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const TrialOutcome& t = trials[i];
    out << i << ',' << t.spec.seed << ',' << t.spec.n << ',' << t.spec.horizon << ','
        << format_double(t.kappa) << ',' << format_double(t.r0) << ',' << t.steps_run << ','
        << (t.first_collapse ? std::to_string(*t.first_collapse) : std::string("-1")) << ','
        << t.completed << ',' << t.floor_ok << ',' << t.late_ok << ',' << t.guarantee_ok << ','
        << t.eventual_ok << ',' << t.filter_ok << ','
        << (t.spec.mode == SimMode::kTaid ? format_double(t.floor_margin) : std::string("nan"))
        << ',' << t.passed() << '\n';
  }
}

std::size_t CsvTable::column(std::string_view name, std::string_view source) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  fail(ErrorCode::kInvalidInput,
       std::string(source) + ": missing required column '" + std::string(name) + "'");
}

std::vector<double> CsvTable::numeric_column(std::string_view name, std::string_view source) const {
  const std::size_t idx = column(name, source);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const auto v = parse_double(row.at(idx));
    require(v.has_value(), ErrorCode::kInvalidInput,
            std::string(source) + ": column '" + std::string(name) + "' has non-numeric cell '" +
                row.at(idx) + "'");
    out.push_back(*v);
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) return table;
  for (auto& c : split(trim(line), ',')) table.columns.emplace_back(trim(c));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(trim(line), ',');
    require(cells.size() == table.columns.size(), ErrorCode::kInvalidInput,
            "CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                std::to_string(table.columns.size()));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read " + path);
  return read_csv(in);
}

double standard_deviation(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size()));
}

}  // namespace taidlab
