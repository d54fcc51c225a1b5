#pragma once

#include <string>
#include <vector>

#include "diffu/common/types.hpp"

namespace diffu::report {

/// Numeric table. Header may be empty.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  Index column(const std::string& name) const;
  Matrix to_matrix() const;
};

/// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double v);

CsvTable parse_csv(const std::string& text, bool has_header);
CsvTable read_csv(const std::string& path, bool has_header);
std::string to_csv_string(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);
void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header = {});

/// Writes text to a file, throwing diffu::Error when the path is unwritable.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace diffu::report
