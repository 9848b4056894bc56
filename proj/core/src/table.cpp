#include "diiv/table.hpp"

#include "diiv/errors.hpp"

namespace diiv {

namespace {

void check_binary(const BinaryColumn& col, const char* name) {
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col[i] != 0 && col[i] != 1) {
      throw NonBinaryError(std::string("column ") + name + " has value " +
                           std::to_string(int(col[i])) + " at row " +
                           std::to_string(i));
    }
  }
}

void check_length(std::size_t got, std::size_t want, const char* name) {
  if (got != want) {
    throw InvalidInputError(std::string("column ") + name + " has " +
                            std::to_string(got) + " rows, expected " +
                            std::to_string(want));
  }
}

}  // namespace

void ObservationTable::validate() const {
  const std::size_t rows = n();
  if (rows == 0) {
    throw InvalidInputError("table has no rows");
  }
  check_length(d.size(), rows, "d");
  check_length(z1.size(), rows, "z1");
  if (z2) check_length(z2->size(), rows, "z2");
  if (h) check_length(h->size(), rows, "h");
  for (const auto& c : covariates) {
    check_length(c.values.size(), rows, c.name.c_str());
  }
  if (!z2 && !h) {
    throw InvalidInputError("table needs z2 (joint design) or h (parallel design)");
  }
  check_binary(d, "d");
  check_binary(z1, "z1");
  if (z2) check_binary(*z2, "z2");
  if (h) check_binary(*h, "h");
}

const NamedColumn* ObservationTable::find_covariate(const std::string& name) const {
  for (const auto& c : covariates) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void DirectedDesign::validate() const {
  if ((s1 != -1 && s1 != +1) || (s2 != -1 && s2 != +1)) {
    throw InvalidInputError("directive orientations must be -1 or +1");
  }
}

}  // namespace diiv
