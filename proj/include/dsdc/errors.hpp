#pragma once

#include <stdexcept>
#include <string>

namespace dsdc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index outside the representable range of a tabulated sequence.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Kernel cannot be placed against the class assumptions (e.g. A undefined).
class ClassificationError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside its documented domain.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value in a numerical input or derivative.
class NumericInputError : public Error {
 public:
  using Error::Error;
};

/// Operation requested on a kernel it does not support.
class UnsupportedKernelError : public Error {
 public:
  using Error::Error;
};

/// Too few samples inside a quadrature window.
class InsufficientResolutionError : public Error {
 public:
  using Error::Error;
};

/// Fixed-step oracle is not converged under step halving.
class OracleInvalidError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsdc
