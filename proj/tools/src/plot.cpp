#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cqrlab/csv.hpp"
#include "cqrlab/error.hpp"

namespace cqrlab::cli {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 70;
constexpr double kRight = 170;
constexpr double kTop = 30;
constexpr double kBottom = 50;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      const double d = std::abs(lo) > 0 ? std::abs(lo) * 0.1 : 1.0;
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace

Series extract_series(const EvalReport& report, const std::string& metric, std::string label) {
  std::optional<double> EvalRow::*member = nullptr;
  if (metric == "mean_return") member = &EvalRow::mean_return;
  if (metric == "violation_pct") member = &EvalRow::violation_pct;
  if (metric == "rscore") member = &EvalRow::rscore;
  if (metric == "cvar10") member = &EvalRow::cvar10;
  if (!member) {
    throw InvalidArgument("unknown metric '" + metric + "' (expected mean_return, violation_pct, rscore or cvar10)");
  }
  Series s;
  s.label = std::move(label);
  for (const auto& row : report.rows) {
    if (!(row.*member)) continue;
    s.x.push_back(row.epoch);
    s.y.push_back(*(row.*member));
  }
  return s;
}

std::string render_svg(const std::vector<Series>& series, const std::string& metric) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  if (!std::isfinite(xr.lo)) xr = {0, 1};
  if (!std::isfinite(yr.lo)) yr = {0, 1};
  xr.pad();
  yr.pad();

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / kTicks;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / kTicks;
    svg += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(px(xv)) + "\" y2=\"" +
           num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" + tick(xv) +
           "</text>\n";
    svg += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
           num(py(yv)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(yv) + 4) + "\" text-anchor=\"end\">" + tick(yv) +
           "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 10) + "\" text-anchor=\"middle\">epoch</text>\n";
  svg += "<text x=\"15\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
         num(kTop + ph / 2) + ")\">" + escape(metric) + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) svg += (k ? " " : "") + num(px(s.x[k])) + "," + num(py(s.y[k]));
    svg += "\"/>\n";
    const double ly = kTop + 10 + 20.0 * static_cast<double>(i);
    const double lx = kLeft + pw + 15;
    svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 25) + "\" y2=\"" + num(ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(lx + 32) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void plot_csvs(const std::vector<std::filesystem::path>& csvs, const std::string& metric,
               const std::filesystem::path& out) {
  if (csvs.empty()) throw InvalidArgument("plot needs at least one CSV");
  std::vector<Series> series;
  for (const auto& path : csvs) {
    const EvalReport report = read_csv(path);
    if (report.rows.empty()) throw FormatError(path.string(), 1, "CSV has no rows");
    Series s = extract_series(report, metric, path.stem().string());
    if (s.x.empty()) throw FormatError(path.string(), 1, "no row carries metric '" + metric + "'");
    series.push_back(std::move(s));
  }
  const std::string svg = render_svg(series, metric);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("cannot write " + out.string());
  f << svg;
}

}  // namespace cqrlab::cli
