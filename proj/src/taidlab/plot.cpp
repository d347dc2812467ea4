// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "taidlab/error.hpp"
#include "taidlab/reports.hpp"
#include "taidlab/text.hpp"

namespace taidlab {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 4> kNames = {"T_TRACE", "LOSS_VARIANCE", "CAPACITY_CURVE",
                                                    "MASS_BARS"};
constexpr std::array<std::string_view, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                      "#9467bd", "#ff7f0e", "#8c564b"};

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string py_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string py_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::isfinite(v[i]) ? format_double(v[i]) : "float('nan')";
  }
  return out + "]";
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

PlotData step_plot(PlotKind kind, std::span<const std::string> paths) {
  PlotData data;
  data.kind = kind;
  const bool trace = kind == PlotKind::kTTrace;
  data.title = trace ? "Interpolation parameter t" : "Training objective";
  data.x_label = "step";
  data.y_label = trace ? "t" : "objective";
  for (const std::string& path : paths) {
    const CsvTable table = read_csv_file(path);
    PlotSeries s;
    s.label = stem_of(path);
    s.x = table.numeric_column("step", path);
    s.y = table.numeric_column(trace ? "t" : "objective", path);
    if (!trace) s.label += " (std " + num(standard_deviation(s.y)) + ")";
    data.series.push_back(std::move(s));
  }
  if (trace && !data.series.empty() && !data.series.front().x.empty()) {
    // Linear reference from the first recorded t to 1 at the last step.
    const PlotSeries& first = data.series.front();
    data.series.push_back({"linear", {first.x.front(), first.x.back()}, {first.y.front(), 1.0}, true});
  }
  return data;
}

PlotData capacity_plot(std::span<const std::string> paths) {
  PlotData data;
  data.kind = PlotKind::kCapacityCurve;
  data.title = "Student eval KL vs teacher size";
  data.x_label = "teacher parameters";
  data.y_label = "eval KL";
  std::map<std::string, std::size_t> index;
  for (const std::string& path : paths) {
    const CsvTable table = read_csv_file(path);
    const std::size_t obj = table.column("objective", path);
    const std::vector<double> xs = table.numeric_column("teacher_params", path);
    const std::vector<double> ys = table.numeric_column("eval_kl", path);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& name = table.rows[r][obj];
      auto [it, inserted] = index.emplace(name, data.series.size());
      if (inserted) data.series.push_back({name, {}, {}, false});
      data.series[it->second].x.push_back(xs[r]);
      data.series[it->second].y.push_back(ys[r]);
    }
  }
  for (PlotSeries& s : data.series) {
    std::vector<std::size_t> order(s.x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
    PlotSeries sorted{s.label, {}, {}, false};
    for (std::size_t i : order) {
      sorted.x.push_back(s.x[i]);
      sorted.y.push_back(s.y[i]);
    }
    s = std::move(sorted);
  }
  return data;
}

PlotData mass_plot(std::span<const std::string> paths) {
  PlotData data;
  data.kind = PlotKind::kMassBars;
  data.title = "Student mass on teacher head and tail";
  data.x_label = "objective";
  data.y_label = "mass";
  std::map<std::string, std::size_t> index;
  std::vector<std::array<double, 2>> sums;
  std::vector<double> counts;
  for (const std::string& path : paths) {
    const CsvTable table = read_csv_file(path);
    const std::size_t obj = table.column("objective", path);
    const std::vector<double> head = table.numeric_column("head_mass", path);
    const std::vector<double> tail = table.numeric_column("tail_mass", path);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      auto [it, inserted] = index.emplace(table.rows[r][obj], data.categories.size());
      if (inserted) {
        data.categories.push_back(table.rows[r][obj]);
        sums.push_back({0.0, 0.0});
        counts.push_back(0.0);
      }
      sums[it->second][0] += head[r];
      sums[it->second][1] += tail[r];
      counts[it->second] += 1.0;
    }
  }
  PlotSeries head{"head_mass", {}, {}, false};
  PlotSeries tail{"tail_mass", {}, {}, false};
  for (std::size_t c = 0; c < data.categories.size(); ++c) {
    head.x.push_back(static_cast<double>(c));
    tail.x.push_back(static_cast<double>(c));
    head.y.push_back(sums[c][0] / counts[c]);
    tail.y.push_back(sums[c][1] / counts[c]);
  }
  data.series = {std::move(head), std::move(tail)};
  return data;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(hi) * 0.05, 1e-6);
      lo -= pad;
      hi += pad;
    }
  }
};

void svg_frame(std::ostringstream& out, const PlotData& data, double left, double top, double w,
               double h) {
  out << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(w)
      << "\" height=\"" << px(h) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << px(left + w / 2) << "\" y=\"" << px(top + h + 38)
      << "\" text-anchor=\"middle\">" << escape_xml(data.x_label) << "</text>\n";
}

void svg_ticks(std::ostringstream& out, const Range& xr, const Range& yr, double left, double top,
               double w, double h, bool x_ticks) {
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double yv = yr.lo + f * (yr.hi - yr.lo);
    const double yp = top + h - f * h;
    out << "<text x=\"" << px(left - 6) << "\" y=\"" << px(yp + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << num(yv) << "</text>\n";
    if (!x_ticks) continue;
    const double xv = xr.lo + f * (xr.hi - xr.lo);
    const double xp = left + f * w;
    out << "<text x=\"" << px(xp) << "\" y=\"" << px(top + h + 16)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << num(xv) << "</text>\n";
  }
}

std::string svg_lines(const PlotData& data) {
  Range xr, yr;
  for (const PlotSeries& s : data.series) {
    for (double x : s.x) xr.add(x);
    for (double y : s.y) yr.add(y);
  }
  xr.finish();
  yr.finish();
  const double w = kWidth - kLeft - kRight;
  const double h = kHeight - kTop - kBottom;
  std::ostringstream out;
  svg_frame(out, data, kLeft, kTop, w, h);
  svg_ticks(out, xr, yr, kLeft, kTop, w, h, true);
  out << "<text transform=\"translate(16," << px(kTop + h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(data.y_label) << "</text>\n";
  for (std::size_t k = 0; k < data.series.size(); ++k) {
    const PlotSeries& s = data.series[k];
    const std::string_view colour = s.dashed ? "#777" : kPalette[k % kPalette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      const double xp = kLeft + (s.x[i] - xr.lo) / (xr.hi - xr.lo) * w;
      const double yp = kTop + h - (s.y[i] - yr.lo) / (yr.hi - yr.lo) * h;
      out << px(xp) << ',' << px(yp) << ' ';
    }
    out << "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << px(kWidth - kRight + 10) << "\" y1=\"" << px(ly) << "\" x2=\""
        << px(kWidth - kRight + 30) << "\" y2=\"" << px(ly) << "\" stroke=\"" << colour << "\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    out << "<text x=\"" << px(kWidth - kRight + 34) << "\" y=\"" << px(ly + 4)
        << "\" font-size=\"11\">" << escape_xml(s.label) << "</text>\n";
  }
  return out.str();
}

// One panel per series, bars per category; head and tail masses differ by
// orders of magnitude so they do not share an axis.
std::string svg_bars(const PlotData& data) {
  std::ostringstream out;
  const std::size_t panels = std::max<std::size_t>(data.series.size(), 1);
  const double gap = 60.0;
  const double w = (kWidth - kLeft - 20.0 - gap * static_cast<double>(panels - 1)) /
                   static_cast<double>(panels);
  const double h = kHeight - kTop - kBottom;
  for (std::size_t p = 0; p < data.series.size(); ++p) {
    const PlotSeries& s = data.series[p];
    Range yr;
    yr.add(0.0);
    for (double y : s.y) yr.add(y);
    yr.finish();
    const double left = kLeft + static_cast<double>(p) * (w + gap);
    svg_frame(out, data, left, kTop, w, h);
    svg_ticks(out, yr, yr, left, kTop, w, h, false);
    out << "<text x=\"" << px(left + w / 2) << "\" y=\"" << px(kTop - 8)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(s.label) << "</text>\n";
    const double slot = w / static_cast<double>(std::max<std::size_t>(data.categories.size(), 1));
    for (std::size_t c = 0; c < data.categories.size(); ++c) {
      const double bar_h = (s.y[c] - yr.lo) / (yr.hi - yr.lo) * h;
      const double x = left + slot * static_cast<double>(c) + slot * 0.2;
      out << "<rect x=\"" << px(x) << "\" y=\"" << px(kTop + h - bar_h) << "\" width=\""
          << px(slot * 0.6) << "\" height=\"" << px(bar_h) << "\" fill=\""
          << kPalette[c % kPalette.size()] << "\"/>\n";
      out << "<text x=\"" << px(x + slot * 0.3) << "\" y=\"" << px(kTop + h + 16)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << escape_xml(data.categories[c])
          << "</text>\n";
    }
  }
  return out.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace

std::string_view plot_kind_name(PlotKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<PlotKind> parse_plot_kind(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<PlotKind>(i);
  }
  return std::nullopt;
}

PlotData load_plot_data(PlotKind kind, std::span<const std::string> csv_paths) {
  require(!csv_paths.empty(), ErrorCode::kInvalidInput, "plot needs at least one CSV file");
  switch (kind) {
    case PlotKind::kTTrace:
    case PlotKind::kLossVariance: return step_plot(kind, csv_paths);
    case PlotKind::kCapacityCurve: return capacity_plot(csv_paths);
    case PlotKind::kMassBars: return mass_plot(csv_paths);
  }
  fail(ErrorCode::kInvalidInput, "unknown plot kind");
}

std::string render_svg(const PlotData& data) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << px(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_xml(data.title) << "</text>\n";
  out << (data.kind == PlotKind::kMassBars ? svg_bars(data) : svg_lines(data));
  out << "</svg>\n";
  return out.str();
}

std::string render_script(const PlotData& data, std::string_view stem) {
  std::ostringstream out;
  out << "#!/usr/bin/env python3\n"
      << "# " << plot_kind_name(data.kind) << " panel; data inlined, needs matplotlib.\n"
      << "import os\n"
      << "import matplotlib\n"
      << "matplotlib.use(\"Agg\")\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "TITLE = " << py_string(data.title) << "\n"
      << "XLABEL = " << py_string(data.x_label) << "\n"
      << "YLABEL = " << py_string(data.y_label) << "\n"
      << "CATEGORIES = [";
  for (std::size_t i = 0; i < data.categories.size(); ++i) {
    out << (i ? ", " : "") << py_string(data.categories[i]);
  }
  out << "]\nSERIES = [\n";
  for (const PlotSeries& s : data.series) {
    out << "    {\"label\": " << py_string(s.label) << ", \"dashed\": "
        << (s.dashed ? "True" : "False") << ",\n     \"x\": " << py_list(s.x)
        << ",\n     \"y\": " << py_list(s.y) << "},\n";
  }
  out << "]\n\n";
  if (data.kind == PlotKind::kMassBars) {
    out << "fig, axes = plt.subplots(1, len(SERIES), figsize=(4 * len(SERIES), 4))\n"
        << "if len(SERIES) == 1:\n"
        << "    axes = [axes]\n"
        << "for ax, s in zip(axes, SERIES):\n"
        << "    ax.bar(CATEGORIES, s[\"y\"])\n"
        << "    ax.set_title(s[\"label\"])\n"
        << "    ax.set_xlabel(XLABEL)\n"
        << "axes[0].set_ylabel(YLABEL)\n"
        << "fig.suptitle(TITLE)\n";
  } else {
    out << "fig, ax = plt.subplots(figsize=(6.4, 4))\n"
        << "for s in SERIES:\n"
        << "    ax.plot(s[\"x\"], s[\"y\"], \"--\" if s[\"dashed\"] else \"-\", label=s[\"label\"])\n"
        << "ax.set_xlabel(XLABEL)\n"
        << "ax.set_ylabel(YLABEL)\n"
        << "ax.set_title(TITLE)\n"
        << "ax.legend()\n";
  }
  out << "fig.tight_layout()\n"
      << "fig.savefig(os.path.join(os.path.dirname(os.path.abspath(__file__)), "
      << py_string(std::string(stem) + ".png") << "), dpi=120)\n";
  return out.str();
}

std::vector<std::string> plot_emit(PlotKind kind, std::span<const std::string> csv_paths,
                                   const std::string& out_dir, const std::string& stem) {
  const PlotData data = load_plot_data(kind, csv_paths);
  fs::create_directories(out_dir);
  const fs::path svg = fs::path(out_dir) / (stem + ".svg");
  const fs::path script = fs::path(out_dir) / (stem + ".py");
  write_file(svg, render_svg(data));
  write_file(script, render_script(data, stem));
  return {svg.string(), script.string()};
}

}  // namespace taidlab
