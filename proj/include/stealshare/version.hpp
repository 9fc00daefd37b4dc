#pragma once

namespace stealshare {

inline constexpr const char* kToolName = "stealshare";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace stealshare
