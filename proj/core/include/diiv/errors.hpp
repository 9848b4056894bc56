#pragma once

#include <stdexcept>
#include <string>

namespace diiv {

// Base for every estimation-layer failure. `code()` is the stable
// machine-readable identifier surfaced by the CLI report files.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// A 0/1 column contains something other than 0 or 1.
class NonBinaryError : public Error {
 public:
  explicit NonBinaryError(const std::string& what) : Error("NonBinary", what) {}
};

// A cell that enters a contrast (or a required design cell) is empty.
class MissingCellError : public Error {
 public:
  explicit MissingCellError(const std::string& what) : Error("MissingCell", what) {}
};

// A ratio denominator fell below the degeneracy tolerance.
class ZeroDenominatorError : public Error {
 public:
  explicit ZeroDenominatorError(const std::string& what)
      : Error("ZeroDenominator", what) {}
};

// Regressor block is not full column rank at the pivot threshold.
class RankDeficientError : public Error {
 public:
  explicit RankDeficientError(const std::string& what)
      : Error("RankDeficient", what) {}
};

// Analytic relevance condition failed: the differential behavioral shift
// (pC1 - pC2) - (pF1 - pF2) is not strictly positive.
class RelevanceViolatedError : public Error {
 public:
  explicit RelevanceViolatedError(const std::string& what)
      : Error("RelevanceViolated", what) {}
};

// Input that fails a structural invariant (table schema, config values).
// The CLI maps this to the data/schema exit code.
class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what)
      : Error("InvalidInput", what) {}
};

// Denominator tolerances. Exact paths are algebraic identities on
// transformed inputs; contrast paths carry sampling noise.
inline constexpr double kExactDegeneracyTol = 1e-12;
inline constexpr double kContrastDegeneracyTol = 1e-8;

}  // namespace diiv
