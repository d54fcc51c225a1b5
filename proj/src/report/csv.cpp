#include "diffu/report/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "diffu/common/error.hpp"

namespace diffu::report {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) {
    // from_chars rejects "inf"/"nan" spellings some writers produce.
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ValidationError("CSV line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Index>(i);
  throw ValidationError("CSV column not found: " + name);
}

Matrix CsvTable::to_matrix() const {
  if (rows.empty()) return {};
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvTable parse_csv(const std::string& text, bool has_header) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (header_pending) {
      t.header = std::move(fields);
      width = t.header.size();
      header_pending = false;
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw ValidationError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                            " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path, bool has_header) { return parse_csv(read_text_file(path), has_header); }

std::string to_csv_string(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  if (!table.header.empty()) out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const CsvTable& table) { write_text_file(path, to_csv_string(table)); }

void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header) {
  CsvTable t;
  t.header = header;
  t.rows.resize(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    auto& row = t.rows[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
  }
  write_csv(path, t);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for writing: " + path);
  os << text;
  if (!os) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace diffu::report
