#include "dualpath/csv.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace dualpath {

namespace {

void write_cell(std::ostream& out, const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) {
    out << cell;
    return;
  }
  out << '"';
  for (char c : cell) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    write_cell(out, cells[i]);
  }
  out << '\n';
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size())
    throw std::logic_error(fmt::format("csv row has {} cells, header has {}", cells.size(),
                                       header.size()));
  rows.push_back(std::move(cells));
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

void write_csv(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& meta,
               const CsvTable& table) {
  for (const auto& [key, value] : meta) {
    // Multi-line values (the embedded config) keep the prefix on every line.
    std::istringstream lines(value);
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
      out << "# " << (first ? key + ": " : std::string(key.size() + 2, ' ')) << line << '\n';
      first = false;
    }
    if (first) out << "# " << key << ":\n";
  }
  write_row(out, table.header);
  for (const auto& row : table.rows) write_row(out, row);
}

std::string render_csv(const std::vector<std::pair<std::string, std::string>>& meta,
                       const CsvTable& table) {
  std::ostringstream out;
  write_csv(out, meta, table);
  return out.str();
}

}  // namespace dualpath
