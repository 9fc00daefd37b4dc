#pragma once

#include <stdexcept>
#include <string>

namespace stealshare {

// Failure categories raised by the library and mapped to machine-readable
// error objects by the CLI.
enum class ErrorKind {
  invalid_parameter,    // argument outside the supported domain
  unsupported_shape,    // structurally invalid distribution description
  numeric_failure,      // singular linear system, NaN, ...
  convergence_failure,  // iteration exhausted without reaching tolerance
  stability,            // model is unstable (lambda >= 1)
  bracket_failure,      // root finder could not bracket a sign change
  decomposition,        // busy-phase chain has no unique stationary vector
  applicability,        // requested quantity undefined for this input
  insufficient_data,    // simulation produced no usable observations
  parse_error,          // malformed descriptor / grid / CLI input
  io_error,             // file could not be read or written
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace stealshare
