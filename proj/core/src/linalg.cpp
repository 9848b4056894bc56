#include "diiv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diiv/errors.hpp"

namespace diiv {

std::string to_string(SeKind kind) {
  return kind == SeKind::classical ? "classical" : "robust-HC1";
}

double OlsFit::se(std::size_t j) const { return std::sqrt(cov[j * k + j]); }

namespace {

double col_norm(const Matrix& a, std::size_t j, std::size_t from) {
  double s = 0.0;
  for (std::size_t i = from; i < a.rows(); ++i) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Householder QR with column pivoting (Businger-Golub). On exit `a`
// holds R in its upper triangle and the Householder vectors below the
// diagonal; `tau` the reflector scales; `perm` the column permutation.
struct PivotedQr {
  Matrix a;
  std::vector<double> tau;
  std::vector<std::size_t> perm;
};

PivotedQr qr_factor(Matrix a) {
  const std::size_t n = a.rows(), k = a.cols();
  PivotedQr f{std::move(a), std::vector<double>(k, 0.0),
              std::vector<std::size_t>(k)};
  std::iota(f.perm.begin(), f.perm.end(), 0);

  double r00 = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    // Pivot on the largest remaining column norm, recomputed exactly.
    std::size_t best = t;
    double best_norm = col_norm(f.a, t, t);
    for (std::size_t j = t + 1; j < k; ++j) {
      const double nj = col_norm(f.a, j, t);
      if (nj > best_norm) {
        best = j;
        best_norm = nj;
      }
    }
    if (best != t) {
      for (std::size_t i = 0; i < n; ++i) std::swap(f.a(i, t), f.a(i, best));
      std::swap(f.perm[t], f.perm[best]);
    }
    if (t == 0) r00 = best_norm;
    if (best_norm <= kRankTol * std::max(r00, 1e-300)) {
      throw RankDeficientError("regressor block is rank deficient (rank " +
                               std::to_string(t) + " of " + std::to_string(k) +
                               " at relative pivot threshold 1e-10)");
    }

    // Householder reflector for column t.
    const double alpha = f.a(t, t) >= 0.0 ? -best_norm : best_norm;
    const double v0 = f.a(t, t) - alpha;
    f.a(t, t) = alpha;
    if (v0 == 0.0) {
      f.tau[t] = 0.0;
      continue;
    }
    // Store v (scaled so v[0] = 1) below the diagonal; H = I - tau v v'
    // with tau = 2 / (v'v).
    for (std::size_t i = t + 1; i < n; ++i) f.a(i, t) /= v0;
    double vtv = 1.0;
    for (std::size_t i = t + 1; i < n; ++i) vtv += f.a(i, t) * f.a(i, t);
    f.tau[t] = 2.0 / vtv;

    // Apply H to the trailing columns.
    for (std::size_t j = t + 1; j < k; ++j) {
      double w = f.a(t, j);
      for (std::size_t i = t + 1; i < n; ++i) w += f.a(i, t) * f.a(i, j);
      w *= f.tau[t];
      f.a(t, j) -= w;
      for (std::size_t i = t + 1; i < n; ++i) f.a(i, j) -= f.a(i, t) * w;
    }
  }
  return f;
}

// Applies Q' to a vector in place.
void apply_qt(const PivotedQr& f, std::vector<double>& v) {
  const std::size_t n = f.a.rows(), k = f.a.cols();
  for (std::size_t t = 0; t < k; ++t) {
    if (f.tau[t] == 0.0) continue;
    double w = v[t];
    for (std::size_t i = t + 1; i < n; ++i) w += f.a(i, t) * v[i];
    w *= f.tau[t];
    v[t] -= w;
    for (std::size_t i = t + 1; i < n; ++i) v[i] -= f.a(i, t) * w;
  }
}

}  // namespace

OlsFit ols_solve(const Matrix& x, std::span<const double> y, SeKind se_kind) {
  const std::size_t n = x.rows(), k = x.cols();
  if (y.size() != n) {
    throw InvalidInputError("response length does not match design rows");
  }
  if (n <= k) {
    throw InvalidInputError("need more rows than regressors (n > k)");
  }

  PivotedQr f = qr_factor(x);

  std::vector<double> qty(y.begin(), y.end());
  apply_qt(f, qty);

  // Back-substitute R beta_perm = (Q'y)[0:k].
  std::vector<double> bp(k, 0.0);
  for (std::size_t ii = k; ii-- > 0;) {
    double s = qty[ii];
    for (std::size_t j = ii + 1; j < k; ++j) s -= f.a(ii, j) * bp[j];
    bp[ii] = s / f.a(ii, ii);
  }

  OlsFit fit;
  fit.n = n;
  fit.k = k;
  fit.se_kind = se_kind;
  fit.coef.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) fit.coef[f.perm[j]] = bp[j];

  fit.fitted.assign(n, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double b = fit.coef[j];
    if (b == 0.0) continue;
    auto cj = x.col(j);
    for (std::size_t i = 0; i < n; ++i) fit.fitted[i] += b * cj[i];
  }
  fit.residuals.assign(n, 0.0);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - fit.fitted[i];
    sse += fit.residuals[i] * fit.residuals[i];
  }
  fit.sigma2 = sse / static_cast<double>(n - k);

  // (X'X)^-1 = P R^-1 R^-T P'.
  Matrix rinv(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t ii = c + 1; ii-- > 0;) {
      double s = (ii == c) ? 1.0 : 0.0;
      for (std::size_t j = ii + 1; j <= c; ++j) s -= f.a(ii, j) * rinv(j, c);
      rinv(ii, c) = s / f.a(ii, ii);
    }
  }
  fit.xtx_inv.assign(k * k, 0.0);  // permuted back, row-major
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t c = std::max(i, j); c < k; ++c) {
        s += rinv(i, c) * rinv(j, c);
      }
      fit.xtx_inv[f.perm[i] * k + f.perm[j]] = s;
    }
  }
  const std::vector<double>& bread = fit.xtx_inv;

  fit.cov.assign(k * k, 0.0);
  if (se_kind == SeKind::classical) {
    for (std::size_t i = 0; i < k * k; ++i) fit.cov[i] = fit.sigma2 * bread[i];
  } else {
    // HC1 sandwich: bread * (sum_i e_i^2 x_i x_i') * bread * n/(n-k).
    std::vector<double> meat(k * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double e2 = fit.residuals[i] * fit.residuals[i];
      if (e2 == 0.0) continue;
      for (std::size_t a = 0; a < k; ++a) {
        const double xa = x(i, a) * e2;
        for (std::size_t b = a; b < k; ++b) meat[a * k + b] += xa * x(i, b);
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < a; ++b) meat[a * k + b] = meat[b * k + a];
    }
    const double scale = static_cast<double>(n) / static_cast<double>(n - k);
    std::vector<double> bm(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c) s += bread[a * k + c] * meat[c * k + b];
        bm[a * k + b] = s;
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c) s += bm[a * k + c] * bread[c * k + b];
        fit.cov[a * k + b] = scale * s;
      }
    }
  }
  return fit;
}

}  // namespace diiv
