#include "stealshare/error.hpp"

namespace stealshare {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid_parameter";
    case ErrorKind::unsupported_shape: return "unsupported_shape";
    case ErrorKind::numeric_failure: return "numeric_failure";
    case ErrorKind::convergence_failure: return "convergence_failure";
    case ErrorKind::stability: return "stability";
    case ErrorKind::bracket_failure: return "bracket_failure";
    case ErrorKind::decomposition: return "decomposition";
    case ErrorKind::applicability: return "applicability";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::parse_error: return "parse_error";
    case ErrorKind::io_error: return "io_error";
  }
  return "?";
}

}  // namespace stealshare
