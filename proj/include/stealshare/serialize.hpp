#pragma once

#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "stealshare/bounds.hpp"
#include "stealshare/compare.hpp"
#include "stealshare/dist_descriptor.hpp"
#include "stealshare/qbd.hpp"
#include "stealshare/sim.hpp"

namespace stealshare {

// JSON descriptor format (canonical; objects use sorted keys):
//   {"kind": "hyperexp", "scv": 5.0, "f": 0.5}
//   {"kind": "erlang", "k": 5}
//   {"kind": "hypoexp", "rates": [2.0, 2.0]}
//   {"kind": "ph", "alpha": [...], "S": [[...], ...]}
// from/to round-trip exactly (doubles use shortest round-trip formatting).
nlohmann::json descriptor_to_json(const DistDescriptor& d);
DistDescriptor descriptor_from_json(const nlohmann::json& j);

// Distribution summary: canonical descriptor plus derived quantities
// (alpha, S, exit rates, mean, scv, hazard class).
nlohmann::json dist_to_json(const DistDescriptor& d);

nlohmann::json to_json(const QbdSolution& sol);
nlohmann::json to_json(const ComparisonVerdict& v);
nlohmann::json to_json(const BoundaryCurve& curve);
nlohmann::json to_json(const SimReport& report);
nlohmann::json to_json(std::span<const BoundReport> bounds);

// Locale-independent shortest round-trip decimal for doubles (used by all
// CSV emitters; JSON output inherits the same property from the library).
std::string format_double(double v);

// CSV emitters.  Rows use format_double; callers prepend provenance
// comments ("# key=value" lines) before the header.
void write_level_csv(std::ostream& os, const QbdSolution& sol, int max_level);
void write_boundary_csv(std::ostream& os, const BoundaryCurve& curve);
void write_sim_runs_csv(std::ostream& os, const SimReport& report);

}  // namespace stealshare
