#include "dilution/errors.hpp"

namespace dilution {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kDegenerateInformation: return "degenerate_information";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kQuadratureNonConvergence: return "quadrature_nonconvergence";
    case ErrorCode::kBracketFailure: return "bracket_failure";
    case ErrorCode::kNonIntegralDesign: return "non_integral_design";
    case ErrorCode::kCertificateFailure: return "certificate_failure";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

}  // namespace dilution
