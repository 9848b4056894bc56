#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace diiv {

// Dense column-major matrix, sized for small regression blocks
// (n rows up to ~1e6, k columns up to ~a dozen).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_[j * rows_ + i];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> col(std::size_t j) {
    return {a_.data() + j * rows_, rows_};
  }
  std::span<const double> col(std::size_t j) const {
    return {a_.data() + j * rows_, rows_};
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

enum class SeKind { classical, robust_hc1 };

std::string to_string(SeKind kind);

struct OlsFit {
  std::vector<double> coef;       // design order
  std::vector<double> fitted;
  std::vector<double> residuals;
  std::vector<double> cov;        // k*k row-major coefficient covariance
  std::vector<double> xtx_inv;    // k*k row-major (X'X)^-1
  double sigma2 = 0.0;            // e'e / (n - k)
  std::size_t n = 0, k = 0;
  SeKind se_kind = SeKind::robust_hc1;

  double se(std::size_t j) const;
};

// Relative pivot threshold that decides column rank in the QR.
inline constexpr double kRankTol = 1e-10;

// Least squares of y on X via Householder QR with column pivoting.
// Classical covariance is sigma2 * (X'X)^-1; robust is the HC1 sandwich
// with the n/(n-k) small-sample factor. Throws RankDeficientError when
// the pivoted R drops below kRankTol relatively, InvalidInputError when
// n <= k.
OlsFit ols_solve(const Matrix& x, std::span<const double> y, SeKind se_kind);

}  // namespace diiv
