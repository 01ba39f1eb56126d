#pragma once

#include <stdexcept>
#include <string>

namespace proxilink {

enum class ErrorCode {
  Domain,
  Configuration,
  NotFound,
  Degenerate,
  PointAtInfinity,
  Validation,
  Format,
  Stream,
  InvalidSample,
  EmptyInput,
  Io,
  Protocol,
};

const char* to_string(ErrorCode code);

// Every failure raised by the engine carries one of the codes above; the C
// boundary maps them one-to-one onto pl_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace proxilink
