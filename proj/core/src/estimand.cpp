#include "diiv/estimand.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "diiv/errors.hpp"

namespace diiv {

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double pairwise_mean(std::span<const double> values) {
  return pairwise_sum(values) / static_cast<double>(values.size());
}

namespace {

struct CellMeans {
  double y1, y0, d1, d0;  // means at contrasted instrument = 1 / 0
};

// Gathers the two conditioning cells in row order and contrasts them.
// `zcol` is the contrasted 0/1 column; `keep` selects rows in the
// conditioning slice.
CellMeans contrast_cells(const ObservationTable& t, const BinaryColumn& zcol,
                         const std::vector<char>& keep, int j,
                         const char* base_desc) {
  std::vector<double> y1, y0, d1, d0;
  for (std::size_t i = 0; i < t.n(); ++i) {
    if (!keep[i]) continue;
    if (zcol[i] == 1) {
      y1.push_back(t.y[i]);
      d1.push_back(static_cast<double>(t.d[i]));
    } else {
      y0.push_back(t.y[i]);
      d0.push_back(static_cast<double>(t.d[i]));
    }
  }
  if (y1.empty() || y0.empty()) {
    throw MissingCellError("instrument " + std::to_string(j) + ": cell (z=" +
                           (y1.empty() ? std::string("1") : std::string("0")) +
                           ", " + base_desc + ") is empty");
  }
  return CellMeans{pairwise_mean(y1), pairwise_mean(y0), pairwise_mean(d1),
                   pairwise_mean(d0)};
}

}  // namespace

EdgeContrast edge_contrasts(const ObservationTable& table, int j, TableMode mode,
                            const DirectedDesign& design) {
  table.validate();
  design.validate();
  if (j != 1 && j != 2) {
    throw InvalidInputError("instrument index must be 1 or 2");
  }

  EdgeContrast out;
  out.instrument = j;
  out.mode = mode;

  if (mode == TableMode::parallel) {
    if (!table.has_h()) {
      throw InvalidInputError("parallel mode requires the frame column h");
    }
    const BinaryColumn& h = *table.h;
    const std::uint8_t frame_value = (j == 1) ? 1 : 0;
    std::vector<char> keep(table.n());
    for (std::size_t i = 0; i < table.n(); ++i) {
      keep[i] = (h[i] == frame_value);
      out.cell_counts[table.z1[i]][h[i]] += 1;
    }
    const auto need = frame_value;
    if (out.cell_counts[1][need] == 0 || out.cell_counts[0][need] == 0) {
      throw MissingCellError("frame " + std::to_string(j) +
                             " lacks one of its assignment cells");
    }
    CellMeans m =
        contrast_cells(table, table.z1, keep, j, j == 1 ? "h=1" : "h=0");
    out.rf = m.y1 - m.y0;
    out.fs = m.d1 - m.d0;
    return out;
  }

  if (!table.has_z2()) {
    throw InvalidInputError("joint mode requires the z2 column");
  }
  const BinaryColumn& zj = (j == 1) ? table.z1 : *table.z2;
  const BinaryColumn& zo = (j == 1) ? *table.z2 : table.z1;
  const int s_other = (j == 1) ? design.s2 : design.s1;
  // Baseline is the aligned origin of the other instrument.
  const std::uint8_t base_raw = (s_other == +1) ? 0 : 1;
  std::vector<char> keep(table.n());
  for (std::size_t i = 0; i < table.n(); ++i) {
    const std::uint8_t aligned_other = (zo[i] == base_raw) ? 0 : 1;
    keep[i] = (aligned_other == 0);
    out.cell_counts[zj[i]][aligned_other] += 1;
  }
  if (out.cell_counts[1][0] == 0 || out.cell_counts[0][0] == 0) {
    throw MissingCellError("instrument " + std::to_string(j) +
                           ": a baseline edge cell is empty");
  }
  CellMeans m = contrast_cells(table, zj, keep, j, "other at baseline");
  out.rf = m.y1 - m.y0;
  out.fs = m.d1 - m.d0;
  return out;
}

DiivResult diiv_ratio(const EdgeContrast& c1, const EdgeContrast& c2,
                      const DirectedDesign& design, double degeneracy_tol) {
  design.validate();
  const double s1 = static_cast<double>(design.s1);
  const double s2 = static_cast<double>(design.s2);
  DiivResult r;
  r.method = DiivMethod::ratio;
  r.numerator = s1 * c1.rf - s2 * c2.rf;
  r.denominator = s1 * c1.fs - s2 * c2.fs;
  const double scale =
      std::max(1.0, std::fabs(s1 * c1.fs) + std::fabs(s2 * c2.fs));
  if (std::fabs(r.denominator) <= degeneracy_tol * scale) {
    throw ZeroDenominatorError(
        "oriented first-stage difference is degenerate (" +
        std::to_string(r.denominator) + "); opposing-shifts relevance fails");
  }
  r.ordering_violation = (r.denominator < 0.0);
  r.tau = r.numerator / r.denominator;
  return r;
}

DiivResult diiv_estimate(const ObservationTable& table, TableMode mode,
                         const DirectedDesign& design) {
  EdgeContrast c1 = edge_contrasts(table, 1, mode, design);
  EdgeContrast c2 = edge_contrasts(table, 2, mode, design);
  DiivResult r = diiv_ratio(c1, c2, design);
  return r;
}

double pooled_iv(const ObservationTable& table) {
  EdgeContrast c1 = edge_contrasts(table, 1, TableMode::parallel);
  EdgeContrast c2 = edge_contrasts(table, 2, TableMode::parallel);
  const double num = c1.rf + c2.rf;
  const double den = c1.fs + c2.fs;
  const double scale = std::max(1.0, std::fabs(c1.fs) + std::fabs(c2.fs));
  if (std::fabs(den) <= kContrastDegeneracyTol * scale) {
    throw ZeroDenominatorError("pooled first stage is degenerate");
  }
  return num / den;
}

BinaryColumn flip_instrument(const BinaryColumn& z) {
  BinaryColumn out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] != 0 && z[i] != 1) {
      throw NonBinaryError("flip_instrument: value " + std::to_string(int(z[i])) +
                           " at row " + std::to_string(i));
    }
    out[i] = static_cast<std::uint8_t>(1 - z[i]);
  }
  return out;
}

BinaryColumn align_instrument(const BinaryColumn& z, int s) {
  if (s != -1 && s != +1) {
    throw InvalidInputError("align_instrument: s must be -1 or +1");
  }
  if (s == +1) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] != 0 && z[i] != 1) {
        throw NonBinaryError("align_instrument: value " +
                             std::to_string(int(z[i])) + " at row " +
                             std::to_string(i));
      }
    }
    return z;
  }
  return flip_instrument(z);
}

DiivResult diiv_from_cells(const std::array<double, 4>& y_cells,
                           const std::array<double, 4>& d_cells,
                           double degeneracy_tol) {
  // Cell order (00, 10, 01, 11); the (1,1) cell does not enter.
  const double y10 = y_cells[1], y01 = y_cells[2];
  const double d10 = d_cells[1], d01 = d_cells[2];
  DiivResult r;
  r.method = DiivMethod::ratio;
  r.numerator = y10 - y01;
  r.denominator = d10 - d01;
  const double scale = std::max(1.0, std::fabs(d10) + std::fabs(d01));
  if (std::fabs(r.denominator) <= degeneracy_tol * scale) {
    throw ZeroDenominatorError("aligned take-up cells coincide (d10 == d01)");
  }
  r.ordering_violation = (r.denominator < 0.0);
  r.tau = r.numerator / r.denominator;
  return r;
}

LambdaWeight lambda_weight(double p_c1, double p_c2, double p_f1, double p_f2) {
  const double dc = p_c1 - p_c2;
  const double df = p_f1 - p_f2;
  const double den = dc - df;
  if (std::fabs(den) <= kExactDegeneracyTol) {
    throw ZeroDenominatorError("lambda_weight: differential shift is zero");
  }
  LambdaWeight w;
  w.value = dc / den;
  w.ordering_violation = (dc < 0.0) || (df > 0.0);
  return w;
}

}  // namespace diiv
