#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccinv {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input files.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A diagonal entry that the sweeps cannot divide by.
class ZeroDiagonalError : public Error {
 public:
  explicit ZeroDiagonalError(std::int64_t index)
      : Error("zero diagonal entry at index " + std::to_string(index)), index_(index) {}
  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

/// A real matrix with c_ii < 0: the noise scale 1/sqrt(c_ii) needs complex arithmetic.
class NegativeDiagonalError : public Error {
 public:
  explicit NegativeDiagonalError(std::int64_t index)
      : Error("negative diagonal entry at index " + std::to_string(index) +
              " requires complex arithmetic"),
        index_(index) {}
  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

/// The chains grew without bound (sp(T) >= 1 or sp(S) >= 1) or produced non-finite values.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::uint64_t cycle, std::vector<double> trajectory)
      : Error(what), cycle_(cycle), trajectory_(std::move(trajectory)) {}
  std::uint64_t cycle() const noexcept { return cycle_; }
  /// Max-norm of the iterates (or coupled differences) per cycle, up to the failure.
  const std::vector<double>& trajectory() const noexcept { return trajectory_; }

 private:
  std::uint64_t cycle_;
  std::vector<double> trajectory_;
};

/// An iterative procedure hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// BiCG breakdown: a near-zero inner product. Distinct from running out of iterations.
class BreakdownError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

}  // namespace ccinv
