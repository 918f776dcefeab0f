#pragma once

#include <stdexcept>
#include <string>

namespace lkcell {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/grid dimension disagreement between operands.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid parameter structure (groups, kernel sizes, channel wiring, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Data-level violation (non-finite values, out-of-range thresholds, ...).
struct ValidationError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Filesystem-level failure (unreadable file, truncated payload, ...).
struct IoError : Error {
  using Error::Error;
};

// Structured-file failure (bad magic, unsupported version, ...).
struct FormatError : Error {
  using Error::Error;
};

}  // namespace lkcell
