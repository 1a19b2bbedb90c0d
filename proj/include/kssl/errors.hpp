#pragma once

#include <stdexcept>
#include <string>

namespace kssl {

// Base class for all library errors; each concrete class maps to a distinct
// CLI exit code (see cli.hpp).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input matrix violated a symmetry precondition.
struct NonSymmetricError : Error {
  using Error::Error;
};

// A matrix that must be invertible (or numerically positive definite) is
// rank-deficient at the configured tolerance.
struct SingularMatrixError : Error {
  using Error::Error;
};

// Operand shapes are incompatible.
struct DimensionMismatchError : Error {
  using Error::Error;
};

// Target representation matrix has rank < d (redundant rows), so the
// augmentation construction is undefined.
struct RankDeficientTargetError : Error {
  using Error::Error;
};

// Loss or gradient became NaN/Inf during optimization (divergence).
struct NonFiniteLossError : Error {
  using Error::Error;
};

// Malformed file contents or config values.
struct ParseError : Error {
  using Error::Error;
};

// Filesystem-level failure (missing file, unwritable path, short read).
struct IoError : Error {
  using Error::Error;
};

// An augmentation operator was applied with a Gram matrix other than the one
// it was built from.
struct GramMismatchError : Error {
  using Error::Error;
};

}  // namespace kssl
