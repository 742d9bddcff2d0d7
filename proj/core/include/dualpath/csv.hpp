#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace dualpath {

/// Rows of preformatted cells under a fixed header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws std::logic_error when the row width differs from the header.
  void add_row(std::vector<std::string> cells);
};

/// Shortest form that round-trips (fmt "{}"), "nan" / "inf" / "-inf" otherwise.
std::string format_number(double value);

/// "#"-prefixed metadata lines ("# key: value") followed by the table. Cells
/// containing commas, quotes or newlines are quoted.
void write_csv(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& meta,
               const CsvTable& table);

std::string render_csv(const std::vector<std::pair<std::string, std::string>>& meta,
                       const CsvTable& table);

}  // namespace dualpath
