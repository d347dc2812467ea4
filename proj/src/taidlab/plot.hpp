// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace taidlab {

enum class PlotKind { kTTrace, kLossVariance, kCapacityCurve, kMassBars };

std::string_view plot_kind_name(PlotKind kind);
std::optional<PlotKind> parse_plot_kind(std::string_view name);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

/// Panel contents in plotting-neutral form. Bar panels use `categories` with
/// one series per bar group, each holding one y per category.
struct PlotData {
  PlotKind kind = PlotKind::kTTrace;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> categories;
  std::vector<PlotSeries> series;
};

/// Reads the CSV columns `kind` needs. Step plots (T_TRACE, LOSS_VARIANCE)
/// take one series per file; CAPACITY_CURVE and MASS_BARS read summary files.
/// A missing column fails with Error(kInvalidInput) naming column and file.
PlotData load_plot_data(PlotKind kind, std::span<const std::string> csv_paths);

std::string render_svg(const PlotData& data);

/// Standalone matplotlib script with the data inlined; writes `<stem>.png`
/// next to itself when run.
std::string render_script(const PlotData& data, std::string_view stem);

/// Writes `<stem>.svg` and `<stem>.py` into `out_dir`; returns both paths.
std::vector<std::string> plot_emit(PlotKind kind, std::span<const std::string> csv_paths,
                                   const std::string& out_dir, const std::string& stem);

}  // namespace taidlab
