#pragma once

#include <stdexcept>
#include <string>

namespace lrmr {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data is malformed (non-finite entries, shape mismatch).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A scalar or index parameter is outside its admissible range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The normal system of a weighted least-squares step is singular,
/// typically because the measurement operator is not surjective.
class IllPosed : public Error {
 public:
  using Error::Error;
};

/// A factorization failed twice or an iterate became non-finite.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// The measurement operator has a trivial kernel.
class NoKernel : public Error {
 public:
  using Error::Error;
};

/// Theory constants requested outside the regime where they are defined.
class OutOfRegime : public Error {
 public:
  using Error::Error;
};

/// Text or image file could not be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrmr
