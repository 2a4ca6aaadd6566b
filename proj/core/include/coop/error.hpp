#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coop {

enum class ErrorKind {
  InvalidMatrix,        // non-square, non-finite, dimension mismatch
  NotMetzler,           // negative off-diagonal beyond the clamp tolerance
  Domain,               // argument outside the operation's domain
  Parameter,            // numeric parameter out of range (step, horizon, ...)
  Reducible,            // irreducibility required but violated
  AssumptionViolation,  // a modelling hypothesis (e.g. irreducible average) fails
  IterationLimit,       // iterative method ran out of iterations
  ContractionFailure,   // period-map fixed point did not converge
  NumericalBlowup,      // renormalization hit a degenerate vector
  Config,               // configuration parse/validation failure
  Io,
  Internal,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace coop
