#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asyncdual {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent block sizes or out-of-range agent indices.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Schedule configuration that violates its invariants, or a trace with an unbounded Q.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// Malformed instance file. The message carries the offending field path.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Iterative oracle ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual, std::size_t iterations)
      : Error(what), best_residual_(best_residual), iterations_(iterations) {}

  double best_residual() const { return best_residual_; }
  std::size_t iterations() const { return iterations_; }

 private:
  double best_residual_;
  std::size_t iterations_;
};

}  // namespace asyncdual
