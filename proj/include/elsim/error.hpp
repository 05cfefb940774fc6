#pragma once

#include <stdexcept>
#include <string>

namespace elsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physical parameters violating an admissibility condition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Iterative linear solver did not reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Time integration produced non-finite or runaway values.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, long step, double time)
      : Error(what), step_(step), time_(time) {}
  long step() const { return step_; }
  double time() const { return time_; }

 private:
  long step_;
  double time_;
};

/// Fields defined on different grids were combined.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace elsim
