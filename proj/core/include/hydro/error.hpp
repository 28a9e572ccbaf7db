#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hydro {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files, bad shapes, violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised by the Cholesky factorization when a pivot is not strictly positive.
/// Usually means the kernel matrix is missing its nugget.
class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(std::size_t pivot)
      : Error("matrix is not positive definite (pivot " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hydro
