#include "lsmimo/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "lsmimo/errors.hpp"

namespace lsmimo {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(CsvMetadata meta, std::vector<CsvColumn> columns)
    : meta_(std::move(meta)), columns_(std::move(columns)) {
  if (columns_.empty()) throw InvalidInput("csv table needs at least one column");
}

void CsvTable::add_row(const std::vector<std::optional<double>>& values) {
  if (values.size() != columns_.size()) throw InvalidInput("csv row width does not match the header");
  rows_.push_back(values);
}

void CsvTable::write(std::ostream& out) const {
  out << "# schema=" << kCsvSchema << " command=" << meta_.command << " scenario=" << meta_.scenario
      << " scenario_hash=" << meta_.scenario_hash << " seed=" << meta_.seed << " trials=" << meta_.trials << '\n';
  out << "# units=";
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c].unit;
  out << '\n';
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c].name;
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (row[c]) out << format_double(*row[c]);
    }
    out << '\n';
  }
}

std::string CsvTable::str() const {
  std::ostringstream s;
  write(s);
  return s.str();
}

}  // namespace lsmimo
