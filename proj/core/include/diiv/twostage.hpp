#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diiv/estimand.hpp"
#include "diiv/linalg.hpp"
#include "diiv/table.hpp"

namespace diiv {

// Typed regression system: response, named regressor block (intercept
// included by the builder), single excluded instrument.
struct DesignMatrix {
  std::vector<double> response;
  std::vector<NamedColumn> regressors;
  NamedColumn excluded_instrument;

  std::size_t n() const { return response.size(); }
  std::size_t k() const { return regressors.size(); }
};

// Fits response on the regressor block (the excluded instrument is not
// part of the fit). Same guarantees as ols_solve.
OlsFit ols_fit(const DesignMatrix& design, SeKind se_kind);

enum class TwoStageMethod { parallel_xor, joint_delta };

std::string to_string(TwoStageMethod method);

enum class Warning { weak_contrast, ordering_violation };

std::string to_string(Warning w);

struct TwoStageReport {
  double tau = 0.0;
  double se = 0.0;
  double first_stage_beta = 0.0;
  double first_stage_f = 0.0;  // squared t of the excluded instrument
  std::size_t n = 0;
  SeKind se_kind = SeKind::robust_hc1;
  TwoStageMethod method = TwoStageMethod::parallel_xor;
  std::vector<Warning> warnings;

  bool has_warning(Warning w) const;
};

// First-stage F below this annotates WeakContrast on the report.
inline constexpr double kWeakContrastF = 10.0;

// Composite instrument w = 1 - (z_pool XOR h): equals 1 exactly when the
// pooled assignment agrees with the frame indicator.
BinaryColumn composite_xor_instrument(const BinaryColumn& z_pool,
                                      const BinaryColumn& h);

// The three derived regressors of the joint representation, built from
// aligned instruments: difference, sum, product. Each row's triple is
// one of (0,0,0), (1,1,0), (-1,1,0), (0,2,1).
struct DerivedRegressors {
  std::vector<double> x_delta;
  std::vector<double> x_sigma;
  std::vector<double> x_cross;
};

DerivedRegressors derived_regressors(const BinaryColumn& z1,
                                     const BinaryColumn& z2,
                                     const DirectedDesign& design);

// Parallel-design 2SLS: first stage d ~ 1 + w + h (+ covariates), second
// stage y ~ 1 + d_hat + h (+ covariates). Numerically reproduces the
// two-frame contrast ratio on symmetric designs.
TwoStageReport two_stage_parallel(const ObservationTable& table, SeKind se_kind,
                                  const std::vector<std::string>& extra_covariates = {});

// Joint-design 2SLS with instrument x_delta and covariates x_sigma,
// x_cross (+ extras). x_cross is dropped automatically when the aligned
// (1,1) cell is empty, or on request.
TwoStageReport two_stage_joint(const ObservationTable& table,
                               const DirectedDesign& design, SeKind se_kind,
                               const std::vector<std::string>& extra_covariates = {},
                               bool drop_cross = false);

// Generic single-endogenous-regressor 2SLS used by the front ends: the
// instrument set is [included, excluded]; reported se uses structural
// residuals y - [included, d] * coef.
TwoStageReport two_stage_single(std::span<const double> y,
                                std::span<const double> d,
                                const std::vector<NamedColumn>& included,
                                const NamedColumn& excluded, SeKind se_kind,
                                TwoStageMethod method);

}  // namespace diiv
