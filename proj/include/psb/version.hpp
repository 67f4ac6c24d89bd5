#pragma once

namespace psb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace psb
