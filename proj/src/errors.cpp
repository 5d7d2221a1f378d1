#include "disth2/errors.hpp"

namespace disth2 {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::NonSymmetric: return "non_symmetric";
    case ErrorCode::NoConvergence: return "no_convergence";
    case ErrorCode::SingularLyapunov: return "singular_lyapunov";
    case ErrorCode::NotStabilizable: return "not_stabilizable";
    case ErrorCode::NotStable: return "not_stable";
    case ErrorCode::NotStandardForm: return "not_standard_form";
    case ErrorCode::GammaInfeasible: return "gamma_infeasible";
    case ErrorCode::COutOfRange: return "c_out_of_range";
    case ErrorCode::InvalidSpectrum: return "invalid_spectrum";
    case ErrorCode::RiccatiFailure: return "riccati_failure";
    case ErrorCode::NotSynchronizing: return "not_synchronizing";
    case ErrorCode::Disconnected: return "disconnected";
    case ErrorCode::DegenerateTrajectory: return "degenerate_trajectory";
  }
  return "unknown";
}

}  // namespace disth2
