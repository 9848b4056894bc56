#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace diiv {

using BinaryColumn = std::vector<std::uint8_t>;

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

// Rectangular estimation dataset. Two layouts share the type:
//
//   parallel — columns y, d, z1 (within-frame assignment), h (frame
//              indicator, h=1 for subpopulation 1); z2 absent
//   joint    — columns y, d, z1, z2; h unused
//
// Binary columns hold only 0/1; validate() enforces the invariants.
struct ObservationTable {
  std::vector<double> y;
  BinaryColumn d;
  BinaryColumn z1;
  std::optional<BinaryColumn> z2;
  std::optional<BinaryColumn> h;
  std::vector<NamedColumn> covariates;

  std::size_t n() const { return y.size(); }
  bool has_z2() const { return z2.has_value(); }
  bool has_h() const { return h.has_value(); }

  // Throws InvalidInputError / NonBinaryError on any violated invariant.
  void validate() const;

  const NamedColumn* find_covariate(const std::string& name) const;
};

// Frame metadata for the two instruments: directive orientation
// s in {-1,+1} (+1 encouragement, -1 discouragement) and an opaque
// attribute label. Labels carry no semantics here.
struct DirectedDesign {
  int s1 = +1;
  int s2 = +1;
  std::string m1;
  std::string m2;

  void validate() const;
};

}  // namespace diiv
