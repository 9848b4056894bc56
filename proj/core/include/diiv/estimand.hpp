#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "diiv/errors.hpp"
#include "diiv/table.hpp"

namespace diiv {

enum class TableMode { parallel, joint };

// Reduced-form / first-stage pair for one instrument edge. cell_counts
// is the full 2x2 cross-tab the contrast was computed from:
// counts[z][b] where z is the contrasted instrument's value and b is
// the conditioning column (other aligned instrument in joint mode, the
// frame indicator in parallel mode).
struct EdgeContrast {
  double rf = 0.0;
  double fs = 0.0;
  std::array<std::array<std::int64_t, 2>, 2> cell_counts{};
  int instrument = 1;
  TableMode mode = TableMode::parallel;
};

enum class DiivMethod { ratio, two_stage_parallel, two_stage_joint };

struct DiivResult {
  double tau = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  DiivMethod method = DiivMethod::ratio;
  // Oriented first-stage difference came out negative: the opposing-shifts
  // ordering is empirically violated (estimate still computed).
  bool ordering_violation = false;
};

struct LambdaWeight {
  double value = 0.0;
  bool ordering_violation = false;
};

// Deterministic summation with a fixed pairwise order; bit-reproducible
// for a given element order.
double pairwise_sum(std::span<const double> values);
double pairwise_mean(std::span<const double> values);

// Edge contrast for instrument j in {1,2}.
//
// parallel: contrasts z1 (assignment) within frame j; requires h.
// joint:    contrasts z_j holding the *aligned* other instrument at 0,
//           i.e. at the design's baseline cell. With the default
//           design (s1=s2=+1) this is literally z_{-j}=0.
EdgeContrast edge_contrasts(const ObservationTable& table, int j, TableMode mode,
                            const DirectedDesign& design = DirectedDesign{});

// Oriented ratio (s1*rf1 - s2*rf2) / (s1*fs1 - s2*fs2).
DiivResult diiv_ratio(const EdgeContrast& c1, const EdgeContrast& c2,
                      const DirectedDesign& design = DirectedDesign{},
                      double degeneracy_tol = kContrastDegeneracyTol);

// Convenience composition: aligned edge contrasts then the oriented ratio.
DiivResult diiv_estimate(const ObservationTable& table, TableMode mode,
                         const DirectedDesign& design = DirectedDesign{});

// Pooled estimand (RF1 + RF2) / (FS1 + FS2) over a parallel table.
double pooled_iv(const ObservationTable& table);

// Column transforms.
BinaryColumn flip_instrument(const BinaryColumn& z);
BinaryColumn align_instrument(const BinaryColumn& z, int s);

// Aligned-cell form: cells ordered (00, 10, 01, 11); the 11 entry is
// never read.
DiivResult diiv_from_cells(const std::array<double, 4>& y_cells,
                           const std::array<double, 4>& d_cells,
                           double degeneracy_tol = kContrastDegeneracyTol);

// Convex weight lambda = (pC1-pC2) / ((pC1-pC2) - (pF1-pF2)). Ordering
// violations (pC1 < pC2 or pF1 > pF2) set the warning flag.
LambdaWeight lambda_weight(double p_c1, double p_c2, double p_f1, double p_f2);

}  // namespace diiv
