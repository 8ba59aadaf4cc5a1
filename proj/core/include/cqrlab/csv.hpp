#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cqrlab/harness.hpp"

namespace cqrlab {

inline constexpr const char* kReportCsvHeader = "epoch,mean_return,violation_pct,rscore,cvar10";

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Header row, then one row per evaluation; absent metrics are empty fields.
void emit_csv(const EvalReport& report, const std::filesystem::path& path);
std::string to_csv(const EvalReport& report);

/// Parses a report written by emit_csv. Throws FormatError on a header other
/// than kReportCsvHeader or a malformed row.
EvalReport read_csv(const std::filesystem::path& path);

}  // namespace cqrlab
