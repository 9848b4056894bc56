#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diiv/estimand.hpp"
#include "diiv/table.hpp"

namespace diiv::cli {

// Strict numeric CSV: first row is the header, comma delimiter, decimal
// point, no quoting. Every field must parse as a double.
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // column-major

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  const std::vector<double>* find(const std::string& name) const;
};

CsvData read_csv(const std::string& path);
CsvData parse_csv(const std::string& text);

// Builds a table from CSV columns. Required: y, d, z1 and (z2 or h).
// Columns named in `covariates` are attached; all other extras are
// ignored. Mode is inferred (z2 -> joint, else h -> parallel) unless
// forced. Throws InvalidInputError / NonBinaryError.
struct LoadedTable {
  ObservationTable table;
  TableMode mode;
};

LoadedTable table_from_csv(const CsvData& csv,
                           std::optional<TableMode> forced_mode,
                           const std::vector<std::string>& covariates);

// Serializes a table (shortest round-trip reals, 0/1 integer columns).
std::string table_to_csv(const ObservationTable& table);

}  // namespace diiv::cli
