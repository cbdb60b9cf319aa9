#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sve::csv {

/// Shortest decimal that round-trips to the same double.
std::string format(double v);

void write_header(std::ostream& os, const std::vector<std::string>& columns);
void write_row(std::ostream& os, std::span<const double> values);

/// Column-major table written row by row; all columns must have equal length.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;

  void add_column(std::string name, std::vector<double> values);
  std::size_t rows() const;
  void write(std::ostream& os) const;
};

}  // namespace sve::csv
