#pragma once

#include <stdexcept>
#include <string>

namespace disth2 {

enum class ErrorCode {
  InvalidInput,
  ParseError,
  DimensionMismatch,
  NonSymmetric,
  NoConvergence,
  SingularLyapunov,
  NotStabilizable,
  NotStable,
  NotStandardForm,
  GammaInfeasible,
  COutOfRange,
  InvalidSpectrum,
  RiccatiFailure,
  NotSynchronizing,
  Disconnected,
  DegenerateTrajectory,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception. Some failures carry a numeric payload:
/// GammaInfeasible carries the achieved trace (or minimal feasible gamma,
/// see the throw site), NotSynchronizing carries the offending eigenvalue
/// and records the 1-based mode index.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Error(ErrorCode code, const std::string& message, double value)
      : std::runtime_error(message), code_(code), value_(value), has_value_(true) {}

  ErrorCode code() const { return code_; }
  bool has_value() const { return has_value_; }
  double value() const { return value_; }

  int mode_index = -1;

 private:
  ErrorCode code_;
  double value_ = 0.0;
  bool has_value_ = false;
};

}  // namespace disth2
