#pragma once

// Test-only oracles, deliberately independent of the library paths they
// check: a series/continued-fraction normal CDF, a long-double
// normal-equations solver, and randomized table generators.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "diiv/linalg.hpp"
#include "diiv/table.hpp"

namespace oracles {

// Normal CDF via the Maclaurin series Phi(x) = 1/2 + phi(x) * sum
// x^(2k+1)/(2k+1)!! in the center and the Mills-ratio continued
// fraction in the tails, evaluated in long double.
inline long double normal_pdf_l(long double x) {
  const long double inv_sqrt_2pi = 0.3989422804014326779399460599343819L;
  return inv_sqrt_2pi * std::exp(-0.5L * x * x);
}

inline long double normal_upper_tail_cf(long double x) {
  // Q(x) = phi(x) / (x + 1/(x + 2/(x + 3/(...)))) for x > 0.
  long double f = 0.0L;
  for (int k = 120; k >= 1; --k) {
    f = static_cast<long double>(k) / (x + f);
  }
  return normal_pdf_l(x) / (x + f);
}

inline double normal_cdf_oracle(double xd) {
  const long double x = xd;
  const long double ax = std::fabs(x);
  if (ax <= 3.5L) {
    long double term = ax;
    long double sum = ax;
    for (int k = 1; k < 400; ++k) {
      term *= ax * ax / static_cast<long double>(2 * k + 1);
      sum += term;
      if (term < 1e-25L * sum) break;
    }
    const long double center = 0.5L + normal_pdf_l(ax) * sum;
    return static_cast<double>(x >= 0 ? center : 1.0L - center);
  }
  const long double tail = normal_upper_tail_cf(ax);
  return static_cast<double>(x >= 0 ? 1.0L - tail : tail);
}

// Solves min ||y - X b|| through the normal equations X'X b = X'y in
// long double with partially pivoted Gaussian elimination.
inline std::vector<double> normal_equations_solve(const diiv::Matrix& x,
                                                  const std::vector<double>& y) {
  const std::size_t n = x.rows(), k = x.cols();
  std::vector<long double> a(k * k, 0.0L), b(k, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const long double xp = x(i, p);
      b[p] += xp * static_cast<long double>(y[i]);
      for (std::size_t q = 0; q < k; ++q) {
        a[p * k + q] += xp * static_cast<long double>(x(i, q));
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::fabs((double)a[r * k + c]) > std::fabs((double)a[piv * k + c])) piv = r;
    }
    if (piv != c) {
      for (std::size_t q = 0; q < k; ++q) std::swap(a[c * k + q], a[piv * k + q]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < k; ++r) {
      const long double m = a[r * k + c] / a[c * k + c];
      for (std::size_t q = c; q < k; ++q) a[r * k + q] -= m * a[c * k + q];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> out(k, 0.0);
  std::vector<long double> bl(k, 0.0L);
  for (std::size_t c = k; c-- > 0;) {
    long double s = b[c];
    for (std::size_t q = c + 1; q < k; ++q) s -= a[c * k + q] * bl[q];
    bl[c] = s / a[c * k + c];
    out[c] = static_cast<double>(bl[c]);
  }
  return out;
}

// Balanced parallel-design table: m rows in each (z, h) cell, random
// cell means for y, random take-up rates. Regenerated by the caller if
// the first-stage difference degenerates.
inline diiv::ObservationTable random_parallel_table(std::mt19937_64& g,
                                                    int m_lo = 10, int m_hi = 100) {
  std::uniform_int_distribution<int> m_dist(m_lo, m_hi);
  std::uniform_real_distribution<double> mu(-2.0, 2.0);
  std::uniform_real_distribution<double> rate(0.1, 0.9);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int m = m_dist(g);

  diiv::ObservationTable t;
  t.h.emplace();
  double cell_mu[2][2], cell_p[2][2];
  for (int z = 0; z < 2; ++z) {
    for (int hv = 0; hv < 2; ++hv) {
      cell_mu[z][hv] = mu(g);
      cell_p[z][hv] = rate(g);
    }
  }
  for (int z = 0; z < 2; ++z) {
    for (int hv = 0; hv < 2; ++hv) {
      for (int i = 0; i < m; ++i) {
        const int d = std::bernoulli_distribution(cell_p[z][hv])(g) ? 1 : 0;
        t.z1.push_back(static_cast<std::uint8_t>(z));
        t.h->push_back(static_cast<std::uint8_t>(hv));
        t.d.push_back(static_cast<std::uint8_t>(d));
        t.y.push_back(cell_mu[z][hv] + 1.7 * d + noise(g));
      }
    }
  }
  return t;
}

// Joint-design table with independently drawn (possibly unbalanced)
// cell counts.
inline diiv::ObservationTable random_joint_table(std::mt19937_64& g,
                                                 int c_lo = 5, int c_hi = 40) {
  std::uniform_int_distribution<int> cnt(c_lo, c_hi);
  std::uniform_real_distribution<double> mu(-2.0, 2.0);
  std::uniform_real_distribution<double> rate(0.1, 0.9);
  std::normal_distribution<double> noise(0.0, 1.0);

  diiv::ObservationTable t;
  t.z2.emplace();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int c = cnt(g);
      const double m = mu(g);
      const double p = rate(g);
      for (int i = 0; i < c; ++i) {
        const int d = std::bernoulli_distribution(p)(g) ? 1 : 0;
        t.z1.push_back(static_cast<std::uint8_t>(a));
        t.z2->push_back(static_cast<std::uint8_t>(b));
        t.d.push_back(static_cast<std::uint8_t>(d));
        t.y.push_back(m + 2.1 * d + noise(g));
      }
    }
  }
  return t;
}

// Deterministic finite population realizing the behavioral-type
// decomposition exactly: 16 units (2 always, 2 never, 6 persuasion-
// prone, 6 reactance-prone) enumerated over both frames and both
// assignments, 64 rows, every (z, h) cell holding all 16 units.
//
// Dyadic shares make all means exact in binary floating point:
//   p_C = (4/16, 2/16), p_F = (2/16, 4/16), tau_C = 3, tau_F = 2
//   => RF = (0.5, -0.125), FS = (0.125, -0.125), DIIV = 2.5.
struct EnumeratedPopulation {
  diiv::ObservationTable table;
  double p_c[2], p_f[2];
  double tau_c = 3.0, tau_f = 2.0;
  double rf[2], fs[2];
};

inline EnumeratedPopulation enumerated_population() {
  struct Unit {
    char type;      // 'A', 'N', 'C', 'F'
    bool resp[2];   // responds to frame 1 / frame 2
    bool high;      // nonresponsive side: contingent always (true) or never
    double y0, gain;
  };
  const std::vector<Unit> units = {
      {'A', {false, false}, true, 1.0, 4.0},
      {'A', {false, false}, true, 2.0, 4.0},
      {'N', {false, false}, false, 0.0, 1.0},
      {'N', {false, false}, false, 3.0, 1.0},
      {'C', {true, true}, false, 0.0, 3.0},
      {'C', {true, false}, false, 1.0, 3.0},
      {'C', {true, false}, false, 2.0, 3.0},
      {'C', {false, false}, true, 0.0, 3.0},   // contingent always-taker
      {'C', {false, false}, false, 1.0, 3.0},  // contingent never-taker
      {'C', {true, true}, false, 2.0, 3.0},
      {'F', {true, true}, false, 0.0, 2.0},
      {'F', {false, true}, false, 1.0, 2.0},
      {'F', {true, true}, false, 0.0, 2.0},
      {'F', {false, false}, true, 1.0, 2.0},   // contingent always-taker
      {'F', {false, false}, false, 2.0, 2.0},  // contingent never-taker
      {'F', {false, true}, false, 2.0, 2.0},
  };

  EnumeratedPopulation pop;
  pop.table.h.emplace();
  int n_c_resp[2] = {0, 0}, n_f_resp[2] = {0, 0};
  for (const Unit& u : units) {
    for (int f = 0; f < 2; ++f) {
      if (u.type == 'C' && u.resp[f]) n_c_resp[f]++;
      if (u.type == 'F' && u.resp[f]) n_f_resp[f]++;
    }
  }
  for (int f = 0; f < 2; ++f) {
    pop.p_c[f] = n_c_resp[f] / 16.0;
    pop.p_f[f] = n_f_resp[f] / 16.0;
    pop.rf[f] = pop.p_c[f] * pop.tau_c - pop.p_f[f] * pop.tau_f;
    pop.fs[f] = pop.p_c[f] - pop.p_f[f];
  }

  for (int f = 0; f < 2; ++f) {        // frame index 0 => frame 1 (h=1)
    for (int z = 0; z < 2; ++z) {
      for (const Unit& u : units) {
        int d;
        switch (u.type) {
          case 'A': d = 1; break;
          case 'N': d = 0; break;
          case 'C': d = u.resp[f] ? z : (u.high ? 1 : 0); break;
          default:  d = u.resp[f] ? 1 - z : (u.high ? 1 : 0); break;
        }
        pop.table.z1.push_back(static_cast<std::uint8_t>(z));
        pop.table.h->push_back(static_cast<std::uint8_t>(f == 0 ? 1 : 0));
        pop.table.d.push_back(static_cast<std::uint8_t>(d));
        pop.table.y.push_back(d ? u.y0 + u.gain : u.y0);
      }
    }
  }
  return pop;
}

}  // namespace oracles
