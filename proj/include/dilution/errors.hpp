#pragma once

#include <stdexcept>
#include <string>

namespace dilution {

/// Stable machine-readable error codes. The CLI emits these verbatim.
enum class ErrorCode {
  kInvalidArgument,
  kInfeasible,
  kDegenerateInformation,
  kDivergence,
  kQuadratureNonConvergence,
  kBracketFailure,
  kNonIntegralDesign,
  kCertificateFailure,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace dilution
