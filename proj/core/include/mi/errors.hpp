#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mi {

/// Precondition or configuration violation (bad sizes, out-of-range
/// hyperparameters, malformed input files).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure of a numerical step on otherwise well-formed input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficientError : public NumericalError {
 public:
  RankDeficientError(const std::string& what, int rank, int columns)
      : NumericalError(what), rank_(rank), columns_(columns) {}

  int rank() const noexcept { return rank_; }
  int columns() const noexcept { return columns_; }

 private:
  int rank_;
  int columns_;
};

/// The sigma^2 posterior has zero scale (no residual spread and no prior
/// scale), so a draw would be identically zero.
class DegeneratePosteriorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A Monte Carlo replicate failed; the message names the cell, the
/// replicate index and the seed path needed to reproduce it.
class ReplicateError : public NumericalError {
 public:
  ReplicateError(const std::string& what, std::size_t replicate)
      : NumericalError(what), replicate_(replicate) {}

  std::size_t replicate() const noexcept { return replicate_; }

 private:
  std::size_t replicate_;
};

}  // namespace mi
