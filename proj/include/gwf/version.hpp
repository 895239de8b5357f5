#pragma once

namespace gwf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gwf
