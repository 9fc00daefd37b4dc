#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stealshare/phase_type.hpp"

namespace stealshare {

// Serializable description of a service-time distribution.  This is the
// exchange format used by the CLI and the JSON reports; build() constructs
// the actual PhaseTypeDist.  Only the fields of the active kind are
// meaningful.
struct DistDescriptor {
  enum class Kind { hyperexp, erlang, hypoexp, ph };

  Kind kind = Kind::erlang;
  // kind == hyperexp: two-moment fit parameters.
  double scv = 1.0;
  double f = 0.5;
  // kind == erlang: number of stages.
  int k = 1;
  // kind == hypoexp: stage rates.
  std::vector<double> rates;
  // kind == ph: explicit initial vector and transient generator (row-major).
  std::vector<double> alpha;
  std::vector<std::vector<double>> S;

  PhaseTypeDist build() const;

  // Compact CLI syntax:
  //   exp                  rate-1 exponential (erlang with k = 1)
  //   erlang:K             K stages
  //   hyperexp:SCV[:F]     two-moment fit, F defaults to 0.5
  //   hypoexp:R1,R2,...    stage rates
  //   @file.json | {...}   JSON descriptor (see serialize.hpp)
  static DistDescriptor parse(std::string_view text);

  // Human-oriented one-liner, e.g. "erlang(k=5)".
  std::string label() const;

  bool operator==(const DistDescriptor&) const = default;
};

const char* to_string(DistDescriptor::Kind kind);

}  // namespace stealshare
