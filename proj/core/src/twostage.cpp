#include "diiv/twostage.hpp"

#include <algorithm>
#include <cmath>

#include "diiv/errors.hpp"

namespace diiv {

std::string to_string(TwoStageMethod method) {
  return method == TwoStageMethod::parallel_xor ? "parallel-xor" : "joint-delta";
}

std::string to_string(Warning w) {
  switch (w) {
    case Warning::weak_contrast:
      return "WeakContrast";
    case Warning::ordering_violation:
      return "OrderingViolation";
  }
  return "Unknown";
}

bool TwoStageReport::has_warning(Warning w) const {
  return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
}

namespace {

Matrix to_matrix(const std::vector<NamedColumn>& cols, std::size_t n) {
  Matrix x(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].values.size() != n) {
      throw InvalidInputError("column " + cols[j].name + " has wrong length");
    }
    auto dst = x.col(j);
    std::copy(cols[j].values.begin(), cols[j].values.end(), dst.begin());
  }
  return x;
}

NamedColumn intercept_column(std::size_t n) {
  return NamedColumn{"const", std::vector<double>(n, 1.0)};
}

std::vector<NamedColumn> gather_covariates(
    const ObservationTable& table, const std::vector<std::string>& names) {
  std::vector<NamedColumn> out;
  for (const auto& name : names) {
    const NamedColumn* c = table.find_covariate(name);
    if (c == nullptr) {
      throw InvalidInputError("covariate not found: " + name);
    }
    out.push_back(*c);
  }
  return out;
}

std::vector<double> to_double(const BinaryColumn& b) {
  return std::vector<double>(b.begin(), b.end());
}

}  // namespace

OlsFit ols_fit(const DesignMatrix& design, SeKind se_kind) {
  return ols_solve(to_matrix(design.regressors, design.n()), design.response,
                   se_kind);
}

BinaryColumn composite_xor_instrument(const BinaryColumn& z_pool,
                                      const BinaryColumn& h) {
  if (z_pool.size() != h.size()) {
    throw InvalidInputError("composite instrument inputs differ in length");
  }
  BinaryColumn w(z_pool.size());
  for (std::size_t i = 0; i < z_pool.size(); ++i) {
    if ((z_pool[i] | h[i]) > 1) {
      throw NonBinaryError("composite_xor_instrument: non-binary entry at row " +
                           std::to_string(i));
    }
    w[i] = static_cast<std::uint8_t>(1 - (z_pool[i] ^ h[i]));
  }
  return w;
}

DerivedRegressors derived_regressors(const BinaryColumn& z1,
                                     const BinaryColumn& z2,
                                     const DirectedDesign& design) {
  design.validate();
  if (z1.size() != z2.size()) {
    throw InvalidInputError("derived_regressors: column lengths differ");
  }
  const BinaryColumn a1 = align_instrument(z1, design.s1);
  const BinaryColumn a2 = align_instrument(z2, design.s2);
  DerivedRegressors out;
  const std::size_t n = z1.size();
  out.x_delta.resize(n);
  out.x_sigma.resize(n);
  out.x_cross.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.x_delta[i] = static_cast<double>(a1[i]) - static_cast<double>(a2[i]);
    out.x_sigma[i] = static_cast<double>(a1[i]) + static_cast<double>(a2[i]);
    out.x_cross[i] = static_cast<double>(a1[i] & a2[i]);
  }
  return out;
}

TwoStageReport two_stage_single(std::span<const double> y,
                                std::span<const double> d,
                                const std::vector<NamedColumn>& included,
                                const NamedColumn& excluded, SeKind se_kind,
                                TwoStageMethod method) {
  const std::size_t n = y.size();

  // First stage: d on [included, excluded].
  std::vector<NamedColumn> first = included;
  first.push_back(excluded);
  OlsFit fs = ols_solve(to_matrix(first, n), d, se_kind);
  const std::size_t wj = first.size() - 1;
  const double beta = fs.coef[wj];
  if (std::fabs(beta) <= kExactDegeneracyTol) {
    throw ZeroDenominatorError(
        "first-stage coefficient on the excluded instrument is zero");
  }
  const double se_beta = fs.se(wj);
  const double f_stat = (beta / se_beta) * (beta / se_beta);

  // Second stage: y on [included, d_hat].
  std::vector<NamedColumn> second = included;
  second.push_back(NamedColumn{"d_hat", fs.fitted});
  Matrix x2 = to_matrix(second, n);
  OlsFit ss = ols_solve(x2, y, se_kind);
  const std::size_t tj = second.size() - 1;

  // Covariance from structural residuals (actual d, not fitted).
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    double xb = 0.0;
    for (std::size_t j = 0; j + 1 < second.size(); ++j) {
      xb += ss.coef[j] * second[j].values[i];
    }
    u[i] = y[i] - xb - ss.coef[tj] * d[i];
  }
  const std::size_t k2 = second.size();
  const std::vector<double>& bread = ss.xtx_inv;
  double se_tau;
  if (se_kind == SeKind::classical) {
    double sse = 0.0;
    for (double e : u) sse += e * e;
    const double s2 = sse / static_cast<double>(n - k2);
    se_tau = std::sqrt(s2 * bread[tj * k2 + tj]);
  } else {
    // HC1 sandwich with structural residuals.
    std::vector<double> meat(k2 * k2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double e2 = u[i] * u[i];
      if (e2 == 0.0) continue;
      for (std::size_t a = 0; a < k2; ++a) {
        const double xa = second[a].values[i] * e2;
        for (std::size_t b = a; b < k2; ++b) {
          meat[a * k2 + b] += xa * second[b].values[i];
        }
      }
    }
    for (std::size_t a = 0; a < k2; ++a) {
      for (std::size_t b = 0; b < a; ++b) meat[a * k2 + b] = meat[b * k2 + a];
    }
    const double scale = static_cast<double>(n) / static_cast<double>(n - k2);
    double var = 0.0;
    for (std::size_t a = 0; a < k2; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < k2; ++b) {
        row += meat[a * k2 + b] * bread[b * k2 + tj];
      }
      var += bread[tj * k2 + a] * row;
    }
    se_tau = std::sqrt(scale * var);
  }

  TwoStageReport report;
  report.tau = ss.coef[tj];
  report.se = se_tau;
  report.first_stage_beta = beta;
  report.first_stage_f = f_stat;
  report.n = n;
  report.se_kind = se_kind;
  report.method = method;
  if (f_stat < kWeakContrastF) {
    report.warnings.push_back(Warning::weak_contrast);
  }
  return report;
}

TwoStageReport two_stage_parallel(const ObservationTable& table, SeKind se_kind,
                                  const std::vector<std::string>& extra_covariates) {
  table.validate();
  if (!table.has_h()) {
    throw InvalidInputError("parallel 2SLS requires the frame column h");
  }
  // All four (z, h) cells must be populated.
  std::int64_t counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < table.n(); ++i) {
    counts[table.z1[i]][(*table.h)[i]] += 1;
  }
  for (int z = 0; z < 2; ++z) {
    for (int hv = 0; hv < 2; ++hv) {
      if (counts[z][hv] == 0) {
        throw MissingCellError("cell (z=" + std::to_string(z) +
                               ", h=" + std::to_string(hv) + ") is empty");
      }
    }
  }

  const BinaryColumn w = composite_xor_instrument(table.z1, *table.h);
  std::vector<NamedColumn> included;
  included.push_back(intercept_column(table.n()));
  included.push_back(NamedColumn{"h", to_double(*table.h)});
  for (auto& c : gather_covariates(table, extra_covariates)) {
    included.push_back(std::move(c));
  }
  const NamedColumn wcol{"w", to_double(w)};
  std::vector<double> d = to_double(table.d);
  return two_stage_single(table.y, d, included, wcol, se_kind,
                          TwoStageMethod::parallel_xor);
}

TwoStageReport two_stage_joint(const ObservationTable& table,
                               const DirectedDesign& design, SeKind se_kind,
                               const std::vector<std::string>& extra_covariates,
                               bool drop_cross) {
  table.validate();
  design.validate();
  if (!table.has_z2()) {
    throw InvalidInputError("joint 2SLS requires the z2 column");
  }
  const BinaryColumn a1 = align_instrument(table.z1, design.s1);
  const BinaryColumn a2 = align_instrument(*table.z2, design.s2);
  std::int64_t cells[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < table.n(); ++i) cells[a1[i]][a2[i]] += 1;
  if (cells[1][0] == 0 || cells[0][1] == 0) {
    throw MissingCellError(std::string("aligned cell (") +
                           (cells[1][0] == 0 ? "1,0" : "0,1") + ") is empty");
  }

  DerivedRegressors dr = derived_regressors(table.z1, *table.z2, design);
  std::vector<NamedColumn> included;
  included.push_back(intercept_column(table.n()));
  included.push_back(NamedColumn{"x_sigma", std::move(dr.x_sigma)});
  if (!drop_cross && cells[1][1] > 0) {
    included.push_back(NamedColumn{"x_cross", std::move(dr.x_cross)});
  }
  for (auto& c : gather_covariates(table, extra_covariates)) {
    included.push_back(std::move(c));
  }
  const NamedColumn xd{"x_delta", std::move(dr.x_delta)};
  std::vector<double> d = to_double(table.d);
  return two_stage_single(table.y, d, included, xd, se_kind,
                          TwoStageMethod::joint_delta);
}

}  // namespace diiv
