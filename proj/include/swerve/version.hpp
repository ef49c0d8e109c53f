#pragma once

namespace swerve {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace swerve
