#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uss {

/// Minimal CSV table: '#'-prefixed comment lines, a header row, data rows.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& out) const;
  std::string str() const;
};

/// Shortest round-trip decimal form.
std::string format_number(double value);

}  // namespace uss
