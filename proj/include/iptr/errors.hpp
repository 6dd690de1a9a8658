#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace iptr {

/// A Gram system A·S·Aᵀ lost positive definiteness at the named pivot.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, Eigen::Index pivot)
      : std::runtime_error(what), pivot_{pivot} {}

  Eigen::Index pivot() const { return pivot_; }

 private:
  Eigen::Index pivot_;
};

/// A matrix expected to have full row rank does not.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, Eigen::Index rank)
      : std::runtime_error(what), rank_{rank} {}

  Eigen::Index estimated_rank() const { return rank_; }

 private:
  Eigen::Index rank_;
};

/// The Woodbury capacitance matrix is numerically singular; rebuild directly.
class DegenerateUpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or a broken numerical invariant.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or probe left the open positive orthant.
class OrthantExitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument: dimension mismatch, out-of-range parameter, bad config.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace iptr
