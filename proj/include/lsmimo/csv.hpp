#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lsmimo {

inline constexpr int kCsvSchema = 1;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

struct CsvColumn {
  std::string name;
  std::string unit;
};

struct CsvMetadata {
  std::string command;
  std::string scenario;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  int trials = 0;
};

/// Two comment lines (metadata, units) then the header row and the data rows.
/// Missing values are written as empty fields.
class CsvTable {
 public:
  CsvTable(CsvMetadata meta, std::vector<CsvColumn> columns);

  void add_row(const std::vector<std::optional<double>>& values);
  std::size_t rows() const { return rows_.size(); }
  void write(std::ostream& out) const;
  std::string str() const;

 private:
  CsvMetadata meta_;
  std::vector<CsvColumn> columns_;
  std::vector<std::vector<std::optional<double>>> rows_;
};

}  // namespace lsmimo
