#pragma once

namespace emopred {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace emopred
