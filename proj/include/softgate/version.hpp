#pragma once

namespace softgate {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace softgate
