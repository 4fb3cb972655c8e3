#include "uss/csv.hpp"

#include <sstream>

#include <fmt/format.h>

namespace uss {

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace

void CsvTable::write(std::ostream& out) const {
  for (const auto& c : comments) out << "# " << c << '\n';
  write_row(out, header);
  for (const auto& r : rows) write_row(out, r);
}

std::string CsvTable::str() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

std::string format_number(double value) { return fmt::format("{}", value); }

}  // namespace uss
