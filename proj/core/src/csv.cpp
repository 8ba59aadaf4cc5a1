#include "cqrlab/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cqrlab/error.hpp"

namespace cqrlab {
namespace {

void put(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) out += format_double(*v);
}

std::optional<double> field(const std::string& text, const std::string& path, std::size_t row) {
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(path, row, "bad number '" + text + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string to_csv(const EvalReport& report) {
  std::string out = kReportCsvHeader;
  out += '\n';
  for (const EvalRow& r : report.rows) {
    out += std::to_string(r.epoch);
    put(out, r.mean_return);
    put(out, r.violation_pct);
    put(out, r.rscore);
    put(out, r.cvar10);
    out += '\n';
  }
  return out;
}

void emit_csv(const EvalReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << to_csv(report);
  if (!out) throw Error("write failed for " + path.string());
}

EvalReport read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string p = path.string();
  std::string line;
  if (!std::getline(in, line) || line != kReportCsvHeader) {
    throw FormatError(p, 0, "expected header '" + std::string(kReportCsvHeader) + "'");
  }
  EvalReport report;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) throw FormatError(p, row, "expected 5 fields, got " + std::to_string(cells.size()));
    EvalRow r;
    const auto epoch = field(cells[0], p, row);
    if (!epoch) throw FormatError(p, row, "missing epoch");
    r.epoch = static_cast<int>(*epoch);
    r.mean_return = field(cells[1], p, row);
    r.violation_pct = field(cells[2], p, row);
    r.rscore = field(cells[3], p, row);
    r.cvar10 = field(cells[4], p, row);
    report.rows.push_back(r);
  }
  return report;
}

}  // namespace cqrlab
