#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cqrlab/harness.hpp"

namespace cqrlab::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Column of `report` as (epoch, value) points; rows missing the metric are
/// skipped. Throws InvalidArgument for an unknown metric name.
Series extract_series(const EvalReport& report, const std::string& metric, std::string label);

/// Line chart with one polyline per series and a legend. Output depends only
/// on the inputs.
std::string render_svg(const std::vector<Series>& series, const std::string& metric);

/// Reads every CSV (legend = file stem), checks that at least one row carries
/// the metric and writes the chart to `out`.
void plot_csvs(const std::vector<std::filesystem::path>& csvs, const std::string& metric,
               const std::filesystem::path& out);

}  // namespace cqrlab::cli
