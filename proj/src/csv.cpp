#include "sve/csv.hpp"

#include <charconv>
#include <ostream>

#include "sve/errors.hpp"

namespace sve::csv {

std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void write_header(std::ostream& os, const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) os << ',';
    os << columns[i];
  }
  os << '\n';
}

void write_row(std::ostream& os, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << format(values[i]);
  }
  os << '\n';
}

void Table::add_column(std::string name, std::vector<double> values) {
  if (!data.empty() && values.size() != data.front().size()) {
    throw DomainError("csv::Table: column '" + name + "' has a different length");
  }
  columns.push_back(std::move(name));
  data.push_back(std::move(values));
}

std::size_t Table::rows() const { return data.empty() ? 0 : data.front().size(); }

void Table::write(std::ostream& os) const {
  write_header(os, columns);
  std::vector<double> row(data.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < data.size(); ++c) row[c] = data[c][r];
    write_row(os, row);
  }
}

}  // namespace sve::csv
