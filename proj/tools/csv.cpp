#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "diiv/errors.hpp"
#include "kvio.hpp"

namespace diiv::cli {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_field(const std::string& field, std::size_t lineno,
                   const std::string& col) {
  const char* b = field.data();
  const char* e = b + field.size();
  if (!field.empty() && field[0] == '+') ++b;
  double v = 0.0;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e || field.empty()) {
    throw InvalidInputError("row " + std::to_string(lineno) + ", column " + col +
                            ": not a number: '" + field + "'");
  }
  return v;
}

BinaryColumn to_binary(const std::vector<double>& col, const std::string& name) {
  BinaryColumn out(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col[i] == 0.0) {
      out[i] = 0;
    } else if (col[i] == 1.0) {
      out[i] = 1;
    } else {
      throw NonBinaryError("column " + name + " has non-binary value " +
                           format_double(col[i]) + " at row " +
                           std::to_string(i + 1));
    }
  }
  return out;
}

}  // namespace

const std::vector<double>* CsvData::find(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return &columns[j];
  }
  return nullptr;
}

CsvData read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidInputError("cannot open file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

CsvData parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidInputError("empty CSV");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvData csv;
  csv.header = split_line(line);
  csv.columns.resize(csv.header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != csv.header.size()) {
      throw InvalidInputError("row " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(csv.header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      csv.columns[j].push_back(parse_field(fields[j], lineno, csv.header[j]));
    }
  }
  if (csv.rows() == 0) {
    throw InvalidInputError("CSV has a header but no data rows");
  }
  return csv;
}

LoadedTable table_from_csv(const CsvData& csv,
                           std::optional<TableMode> forced_mode,
                           const std::vector<std::string>& covariates) {
  for (const char* req : {"y", "d", "z1"}) {
    if (csv.find(req) == nullptr) {
      throw InvalidInputError(std::string("missing column: ") + req);
    }
  }
  const std::vector<double>* z2 = csv.find("z2");
  const std::vector<double>* h = csv.find("h");

  TableMode mode;
  if (forced_mode) {
    mode = *forced_mode;
    if (mode == TableMode::joint && z2 == nullptr) {
      throw InvalidInputError("missing column: z2");
    }
    if (mode == TableMode::parallel && h == nullptr) {
      throw InvalidInputError("missing column: h");
    }
  } else if (z2 != nullptr) {
    mode = TableMode::joint;
  } else if (h != nullptr) {
    mode = TableMode::parallel;
  } else {
    throw InvalidInputError("missing column: z2 or h");
  }

  LoadedTable out;
  out.mode = mode;
  out.table.y = *csv.find("y");
  out.table.d = to_binary(*csv.find("d"), "d");
  out.table.z1 = to_binary(*csv.find("z1"), "z1");
  if (mode == TableMode::joint) {
    out.table.z2 = to_binary(*z2, "z2");
    if (h != nullptr) out.table.h = to_binary(*h, "h");
  } else {
    out.table.h = to_binary(*h, "h");
    if (z2 != nullptr) out.table.z2 = to_binary(*z2, "z2");
  }
  for (const std::string& name : covariates) {
    const std::vector<double>* col = csv.find(name);
    if (col == nullptr) {
      throw InvalidInputError("missing covariate column: " + name);
    }
    out.table.covariates.push_back(NamedColumn{name, *col});
  }
  out.table.validate();
  return out;
}

std::string table_to_csv(const ObservationTable& table) {
  std::string out = "y,d,z1";
  if (table.has_z2()) out += ",z2";
  if (table.has_h()) out += ",h";
  for (const auto& c : table.covariates) out += "," + c.name;
  out += '\n';
  for (std::size_t i = 0; i < table.n(); ++i) {
    out += format_double(table.y[i]);
    out += ',';
    out += char('0' + table.d[i]);
    out += ',';
    out += char('0' + table.z1[i]);
    if (table.has_z2()) {
      out += ',';
      out += char('0' + (*table.z2)[i]);
    }
    if (table.has_h()) {
      out += ',';
      out += char('0' + (*table.h)[i]);
    }
    for (const auto& c : table.covariates) {
      out += ',';
      out += format_double(c.values[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace diiv::cli
