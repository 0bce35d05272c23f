#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fairmit/errors.hpp"
#include "fairmit/harness.hpp"

namespace fairmit {

namespace {

// Fixed-point with trailing zeros trimmed: 78.0 -> "78", -0.0 -> "0".
std::string trim_fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

const char* yes_no(bool v) { return v ? "yes" : "no"; }

const std::vector<std::string> kHeader = {
    "model", "transfer", "threshold", "reweight", "augment", "accuracy",
    "dpd",   "ppd",      "eood",      "prpd",     "eval_size"};

void check_cell(const std::string& cell) {
  if (cell.find(',') != std::string::npos ||
      cell.find('\n') != std::string::npos ||
      cell.find('|') != std::string::npos) {
    throw input_error("report cell contains a delimiter: '" + cell + "'");
  }
}

std::vector<std::string> row_cells(const ResultRow& row) {
  std::vector<std::string> cells;
  cells.push_back(row.model_tag);
  cells.push_back(yes_no(row.transfer));
  cells.push_back(row.threshold ? strategy_name(*row.threshold) : "none");
  cells.push_back(yes_no(row.reweight));
  cells.push_back(yes_no(row.augment));
  cells.push_back(format_percent(row.accuracy));
  cells.push_back(format_count(row.dpd));
  cells.push_back(format_metric(row.ppd));
  cells.push_back(format_metric(row.eood));
  cells.push_back(format_metric(row.prpd));
  cells.push_back(std::to_string(row.eval_size));
  for (const auto& cell : cells) check_cell(cell);
  return cells;
}

void emit_csv_line(const std::vector<std::string>& cells, std::ostream& out) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i != 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

void emit_md_line(const std::vector<std::string>& cells, std::ostream& out) {
  out << '|';
  for (const auto& cell : cells) {
    out << ' ' << cell << " |";
  }
  out << '\n';
}

}  // namespace

std::string format_percent(const ValueWithSpread& v) {
  if (v.spread) {
    return trim_fixed(v.value, 1) + " +/- " + trim_fixed(*v.spread, 1) + "%";
  }
  return trim_fixed(v.value, 1) + "%";
}

std::string format_count(const ValueWithSpread& v) {
  if (v.spread) {
    return trim_fixed(v.value, 1) + " +/- " + trim_fixed(*v.spread, 1);
  }
  return std::to_string(std::llround(v.value));
}

std::string format_metric(const ValueWithSpread& v) {
  if (v.spread) {
    return trim_fixed(v.value, 3) + " +/- " + trim_fixed(*v.spread, 3);
  }
  return trim_fixed(v.value, 3);
}

void emit_cells(const ReportCells& cells, std::ostream& out,
                ReportFormat format) {
  if (cells.header.empty()) {
    throw input_error("report has no header");
  }
  for (const auto& row : cells.rows) {
    if (row.size() != cells.header.size()) {
      throw input_error("report row width does not match header");
    }
  }
  if (format == ReportFormat::Csv) {
    emit_csv_line(cells.header, out);
    for (const auto& row : cells.rows) {
      emit_csv_line(row, out);
    }
  } else {
    emit_md_line(cells.header, out);
    std::vector<std::string> rule(cells.header.size(), "---");
    emit_md_line(rule, out);
    for (const auto& row : cells.rows) {
      emit_md_line(row, out);
    }
  }
}

void emit_report(std::span<const ResultRow> rows, std::ostream& out,
                 ReportFormat format) {
  if (rows.empty()) {
    throw input_error("no rows to report");
  }
  ReportCells cells;
  cells.header = kHeader;
  for (const auto& row : rows) {
    cells.rows.push_back(row_cells(row));
  }
  emit_cells(cells, out, format);
}

void write_report(std::span<const ResultRow> rows,
                  const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) {
    throw input_error("cannot open file for writing: " + path.string());
  }
  emit_report(rows, out, format);
  if (!out) {
    throw input_error("failed writing file: " + path.string());
  }
}

ReportCells parse_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw input_error("cannot open file: " + path.string());
  }
  ReportCells cells;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(current);
        current.clear();
      } else {
        current += c;
      }
    }
    fields.push_back(current);
    if (cells.header.empty()) {
      cells.header = std::move(fields);
    } else {
      if (fields.size() != cells.header.size()) {
        throw input_error("report row width does not match header in " +
                          path.string());
      }
      cells.rows.push_back(std::move(fields));
    }
  }
  if (cells.header.empty()) {
    throw input_error("empty input");
  }
  return cells;
}

}  // namespace fairmit
