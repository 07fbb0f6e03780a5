#pragma once

#include <stdexcept>
#include <string>

namespace colprune {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf iterates or a sustained loss increase.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// ||U_t||_op exceeded the configured bound while the guard was armed.
class GuardViolation : public Error {
 public:
  GuardViolation(long iteration, double op_norm, double bound)
      : Error("operator-norm guard violated at iteration " + std::to_string(iteration) +
              ": ||U||_op = " + std::to_string(op_norm) + " > " + std::to_string(bound)),
        iteration_(iteration),
        op_norm_(op_norm) {}

  long iteration() const { return iteration_; }
  double op_norm() const { return op_norm_; }

 private:
  long iteration_;
  double op_norm_;
};

/// Error raised inside run_pipeline, tagged with the phase that failed.
class PipelineError : public Error {
 public:
  PipelineError(std::string phase, const std::string& what)
      : Error("[" + phase + "] " + what), phase_(std::move(phase)) {}

  const std::string& phase() const { return phase_; }

 private:
  std::string phase_;
};

}  // namespace colprune
