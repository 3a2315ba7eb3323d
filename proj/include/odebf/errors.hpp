/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by every odebf module.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace odebf {

/** @brief Base class for all library errors. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** @brief A solver step produced NaN or Inf. */
class NonFiniteState : public Error {
 public:
  NonFiniteState(double t, std::vector<double> theta, std::size_t step);

  double time() const noexcept { return t_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  std::size_t step_index() const noexcept { return step_; }

 private:
  double t_;
  std::vector<double> theta_;
  std::size_t step_;
};

/** @brief Observation or end time does not fall on the solver grid. */
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/** @brief Convergence-order fit with no usable error signal. */
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

/** @brief MCMC started from a point with zero posterior density. */
class InitializationError : public Error {
 public:
  using Error::Error;
};

/** @brief Quadrature bounds cut off non-negligible posterior mass. */
class BoundsTooTight : public Error {
 public:
  using Error::Error;
};

/** @brief Evidence-curve regression cannot identify its intercept. */
class IllConditionedFit : public Error {
 public:
  using Error::Error;
};

/** @brief No step size on the grid is indistinguishable from the exact model. */
class NoAdmissibleStep : public Error {
 public:
  using Error::Error;
};

/** @brief Malformed input file. */
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/** @brief Observation times are not strictly increasing. */
class NonMonotoneTimes : public Error {
 public:
  using Error::Error;
};

}  // namespace odebf
