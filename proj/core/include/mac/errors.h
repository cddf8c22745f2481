#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mac {

enum class ErrorKind {
  kInvalidArgument,
  kNumericalError,
  kSingularMatrix,
  kInfeasible,
  kNonConvergence,
  kDegenerateProblem,
  kAmbiguousBracket,
  kUnboundedGame,
  kDivergence,
  kIo,
};

/// Stable machine-readable name, e.g. "singular-matrix".
std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `value()` carries the numeric detail
/// that goes with the kind (smallest |eigenvalue| for singular matrices, last
/// residual for non-convergence, ...) and is NaN when there is none.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        double value = std::numeric_limits<double>::quiet_NaN());

  ErrorKind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }

 private:
  ErrorKind kind_;
  double value_;
};

}  // namespace mac
