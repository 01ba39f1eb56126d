#include "error.hpp"

namespace proxilink {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::Degenerate: return "degenerate-configuration";
    case ErrorCode::PointAtInfinity: return "point-at-infinity";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Format: return "format";
    case ErrorCode::Stream: return "stream";
    case ErrorCode::InvalidSample: return "invalid-sample";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::Io: return "io";
    case ErrorCode::Protocol: return "protocol";
  }
  return "unknown";
}

}  // namespace proxilink
